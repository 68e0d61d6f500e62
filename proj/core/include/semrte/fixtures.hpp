#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semrte/aspects.hpp"
#include "semrte/corpus.hpp"

namespace semrte {

// Synthetic corpora for tests and demos.
enum class FixtureKind {
  // text2 is drawn from a label-specific part of the lexicon and carries a
  // label keyword. Aspects are random and carry no information about the
  // label.
  kSeparable,
  // Texts are random. Each text1 has two predicates: the first (V at word 0)
  // is random, the second (V at word 3) follows a role span over words 1-2
  // whose role (ARG0/ARG1/ARG2) is the label. Only a model that reads the
  // second aspect can beat chance.
  kAspectSignal,
};

struct FixtureSizes {
  std::size_t train = 32;
  std::size_t val = 0;
  std::size_t test = 0;
};

struct Fixture {
  std::vector<PremisePair> train, val, test;
  // Uncapped aspect sets for both sides of every pair, keyed by
  // text1_sentence_id / text2_sentence_id.
  std::vector<AspectSet> aspects;
  std::vector<SentenceTokens> sentences;
  // What ten ensemble SRL models would emit for `sentences`: the true
  // aspects with duplicates across models, some omissions and some
  // multi-verb sequences that the merge rules remove.
  std::vector<std::vector<LabeledSentence>> model_outputs;
};

inline constexpr int kFixtureModels = 10;

Fixture generate_fixture(FixtureKind kind, const FixtureSizes& sizes, std::uint64_t seed);

std::string to_string(FixtureKind kind);
// "separable" or "aspect-signal"; throws std::invalid_argument otherwise.
FixtureKind parse_fixture_kind(const std::string& name);

}  // namespace semrte
