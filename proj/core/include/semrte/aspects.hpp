#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semrte/corpus.hpp"

namespace semrte {

// One label sequence emitted by one of the ensemble SRL models.
struct PredictedSequence {
  std::string sentence_id;
  int source_model = 0;
  std::vector<std::string> labels;

  bool operator==(const PredictedSequence&) const = default;
};

// A sentence with its merged predicate aspects (one IOB row per predicate).
struct AspectSet {
  std::string sentence_id;
  std::vector<std::string> tokens;
  std::vector<std::vector<std::string>> aspects;

  bool operator==(const AspectSet&) const = default;
};

struct SentenceTokens {
  std::string sentence_id;
  std::vector<std::string> tokens;
};

// Keeps the first occurrence of each (sentence_id, labels); stable.
std::vector<PredictedSequence> dedupe(std::span<const PredictedSequence> seqs);

// Drops sequences whose span decomposition has two or more V spans.
std::vector<PredictedSequence> filter_multi_verb(std::span<const PredictedSequence> seqs);

// Number of V spans in an IOB sequence.
std::size_t count_verb_spans(std::span<const std::string> labels);

// One AspectSet per entry of `sentences`, in that order. Aspects are ordered by
// the start of their V span (sequences without V last), ties broken by the
// label sequence. Sentences without any sequence get a single all-O aspect.
// Throws DataError on an unknown sentence id or a length mismatch.
std::vector<AspectSet> group_by_sentence(std::span<const PredictedSequence> seqs,
                                         std::span<const SentenceTokens> sentences);

// Keeps the first m aspects and pads with all-O rows up to exactly m.
AspectSet cap_and_pad(const AspectSet& aset, int m);

// Aspects that contain a V span (padding and the fallback row count 0).
int count_predicates(const AspectSet& aset);

// Row-major m x width tag grid for the joined word sequence
// [CLS] text1 [SEP] text2 [SEP]. Special positions carry O.
struct PairAspectGrid {
  int m = 0;
  std::size_t width = 0;
  std::vector<std::vector<std::string>> rows;
};

// `keep1`/`keep2` truncate each side to its first words, matching the
// tokenizer's word-boundary truncation; npos keeps everything.
PairAspectGrid pair_aspects(const PremisePair& pair, const AspectSet& a1, const AspectSet& a2,
                            int m, std::size_t keep1 = std::string::npos,
                            std::size_t keep2 = std::string::npos);

// Counters reported by the merge pipeline.
struct MergeStats {
  std::size_t input_sequences = 0;
  std::size_t removed_duplicates = 0;
  std::size_t removed_multi_verb = 0;
  std::size_t fallback_sentences = 0;
};

// dedupe -> filter_multi_verb -> group_by_sentence -> cap_and_pad.
std::vector<AspectSet> merge_aspects(std::span<const PredictedSequence> seqs,
                                     std::span<const SentenceTokens> sentences, int m,
                                     MergeStats* stats = nullptr);

// Line-delimited JSON {sentence_id, tokens, aspects}.
std::string serialize_aspect_sets(std::span<const AspectSet> sets);
std::vector<AspectSet> parse_aspect_sets(std::string_view text);

// Line-delimited JSON {sentence_id, tokens}.
std::string serialize_sentence_tokens(std::span<const SentenceTokens> sentences);
std::vector<SentenceTokens> parse_sentence_tokens(std::string_view text);

// Sentence ids used to attach aspect sets to the two sides of a pair.
std::string text1_sentence_id(const PremisePair& pair);
std::string text2_sentence_id(const PremisePair& pair);
std::vector<SentenceTokens> sentences_of_pairs(std::span<const PremisePair> pairs);

// Predictions of one ensemble member read from a CoNLL file.
std::vector<PredictedSequence> predictions_from_conll(std::span<const LabeledSentence> sentences,
                                                      int source_model);

}  // namespace semrte
