#include "semrte/fixtures.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

#include "semrte/rng.hpp"

namespace semrte {

namespace {

constexpr const char* kKeywords[kNumLabels] = {"dongy", "phandoi", "trunglap"};
constexpr const char* kSignalRoles[kNumLabels] = {"ARG0", "ARG1", "ARG2"};
constexpr const char* kNoiseRoles[] = {"ARG0", "ARG1", "ARG2", "ARGM-LOC"};

std::vector<std::string> make_lexicon(Rng& rng, std::size_t n) {
  static const char* onsets[] = {"b", "c", "d", "g", "h", "k", "l", "m", "n", "ph", "s", "t", "th", "v", "x"};
  static const char* rimes[] = {"a", "an", "ang", "ao", "e", "em", "i", "inh", "o", "ong", "u", "ung", "uy", "y"};
  std::set<std::string> seen(std::begin(kKeywords), std::end(kKeywords));
  std::vector<std::string> words;
  while (words.size() < n) {
    std::string w;
    const auto syllables = 1 + rng.uniform_index(2);
    for (std::uint64_t s = 0; s < syllables; ++s) {
      w += onsets[rng.uniform_index(std::size(onsets))];
      w += rimes[rng.uniform_index(std::size(rimes))];
    }
    if (seen.insert(w).second) words.push_back(w);
  }
  return words;
}

std::vector<std::string> random_text(Rng& rng, const std::vector<std::string>& lexicon, std::size_t lo,
                                     std::size_t hi) {
  const std::size_t n = lo + rng.uniform_index(hi - lo + 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(lexicon[rng.uniform_index(lexicon.size())]);
  return out;
}

void place(std::vector<std::string>& labels, const std::string& role, std::size_t start, std::size_t len) {
  labels[start] = "B-" + role;
  for (std::size_t i = 1; i < len; ++i) labels[start + i] = "I-" + role;
}

// V at `v`, plus one role span on a random side when there is room.
std::vector<std::string> random_aspect(Rng& rng, std::size_t n, std::size_t v) {
  std::vector<std::string> labels(n, "O");
  labels[v] = "B-V";
  const std::string role = kNoiseRoles[rng.uniform_index(std::size(kNoiseRoles))];
  const bool left_room = v >= 1, right_room = v + 1 < n;
  if (!left_room && !right_room) return labels;
  const bool left = left_room && (!right_room || rng.uniform_index(2) == 0);
  if (left) {
    const std::size_t len = 1 + rng.uniform_index(std::min<std::size_t>(v, 2));
    place(labels, role, v - len, len);
  } else {
    const std::size_t room = n - v - 1;
    const std::size_t len = 1 + rng.uniform_index(std::min<std::size_t>(room, 2));
    place(labels, role, v + 1, len);
  }
  return labels;
}

// Both predicates of a multi-verb mis-parse merged into one row.
std::vector<std::string> merged_verbs(const std::vector<std::vector<std::string>>& aspects) {
  std::vector<std::string> out(aspects[0].size(), "O");
  for (const auto& a : aspects) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] == "B-V") out[i] = "B-V";
    }
  }
  return out;
}

}  // namespace

std::string to_string(FixtureKind kind) {
  return kind == FixtureKind::kSeparable ? "separable" : "aspect-signal";
}

FixtureKind parse_fixture_kind(const std::string& name) {
  if (name == "separable") return FixtureKind::kSeparable;
  if (name == "aspect-signal") return FixtureKind::kAspectSignal;
  throw std::invalid_argument("unknown fixture kind '" + name + "' (expected separable or aspect-signal)");
}

Fixture generate_fixture(FixtureKind kind, const FixtureSizes& sizes, std::uint64_t seed) {
  Rng rng(seed);
  const auto lexicon = make_lexicon(rng, 240);
  const std::size_t total = sizes.train + sizes.val + sizes.test;
  if (total == 0) throw std::invalid_argument("generate_fixture: no pairs requested");

  std::vector<Label> labels(total);
  for (std::size_t i = 0; i < total; ++i) labels[i] = kAllLabels[i % kNumLabels];
  rng.shuffle(labels);

  Fixture fx;
  std::vector<PremisePair> all;
  for (std::size_t i = 0; i < total; ++i) {
    PremisePair p;
    char id[32];
    std::snprintf(id, sizeof id, "p%04zu", i);
    p.id = id;
    p.label = labels[i];
    p.lang = rng.uniform_index(2) == 0 ? Lang::kVie : Lang::kEng;
    p.text1 = random_text(rng, lexicon, 4, 8);
    p.text2 = random_text(rng, lexicon, 4, 8);
    const int li = label_index(p.label);

    AspectSet a1{text1_sentence_id(p), p.text1, {}};
    AspectSet a2{text2_sentence_id(p), p.text2, {}};
    if (kind == FixtureKind::kSeparable) {
      // Label-specific third of the lexicon, plus the keyword.
      const std::size_t third = lexicon.size() / kNumLabels;
      for (auto& w : p.text2) w = lexicon[static_cast<std::size_t>(li) * third + rng.uniform_index(third)];
      p.text2[rng.uniform_index(p.text2.size())] = kKeywords[li];
      a2.tokens = p.text2;
      a1.aspects.push_back(random_aspect(rng, p.text1.size(), rng.uniform_index(p.text1.size())));
    } else {
      std::vector<std::string> signal(p.text1.size(), "O");
      place(signal, kSignalRoles[li], 1, 2);
      signal[3] = "B-V";
      a1.aspects.push_back(random_aspect(rng, p.text1.size(), 0));
      a1.aspects.push_back(std::move(signal));
    }
    a2.aspects.push_back(random_aspect(rng, p.text2.size(), rng.uniform_index(p.text2.size())));
    fx.aspects.push_back(std::move(a1));
    fx.aspects.push_back(std::move(a2));
    all.push_back(std::move(p));
  }
  fx.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(sizes.train));
  fx.val.assign(all.begin() + static_cast<std::ptrdiff_t>(sizes.train),
                all.begin() + static_cast<std::ptrdiff_t>(sizes.train + sizes.val));
  fx.test.assign(all.begin() + static_cast<std::ptrdiff_t>(sizes.train + sizes.val), all.end());
  fx.sentences = sentences_of_pairs(all);

  fx.model_outputs.resize(kFixtureModels);
  for (std::size_t s = 0; s < fx.aspects.size(); ++s) {
    const AspectSet& a = fx.aspects[s];
    for (int k = 0; k < kFixtureModels; ++k) {
      auto& out = fx.model_outputs[static_cast<std::size_t>(k)];
      for (std::size_t j = 0; j < a.aspects.size(); ++j) {
        // Model 0 always reports everything, so omissions elsewhere never
        // lose an aspect.
        if (k != 0 && (s + j + static_cast<std::size_t>(k)) % 4 == 0) continue;
        out.push_back({a.sentence_id, a.tokens, a.aspects[j]});
      }
      if (a.aspects.size() >= 2 && k == 3 && s % 5 == 1) {
        out.push_back({a.sentence_id, a.tokens, merged_verbs(a.aspects)});
      }
    }
  }
  return fx;
}

}  // namespace semrte
