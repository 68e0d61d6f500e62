#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace semrte {

// A labeled argument span over word indices, both ends inclusive.
struct Span {
  std::string role;
  std::size_t start = 0;
  std::size_t end = 0;

  auto operator<=>(const Span&) const = default;
};

// Span-level scores. Fractions in [0,1]; 0/0 is reported as 0.
struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  static PRF from_counts(std::size_t tp, std::size_t fp, std::size_t fn);
};

struct KFoldPlan {
  int k = 0;
  std::vector<std::string> ids;   // input order
  std::vector<int> fold_of;       // parallel to ids

  std::vector<std::string> fold_members(int fold) const;
  std::vector<std::size_t> fold_sizes() const;
};

// Maximal B-/I- runs of the same role, ordered by start. Labels must already
// satisfy the IOB grammar.
std::vector<Span> extract_spans(std::span<const std::string> labels);

// Inverse of extract_spans for non-overlapping spans.
std::vector<std::string> spans_to_iob(std::span<const Span> spans, std::size_t length);

// Micro-averaged exact-match (role, start, end) scoring over sentences.
PRF span_prf(std::span<const std::vector<Span>> gold, std::span<const std::vector<Span>> pred);

// Seeded shuffle, then fold i receives shuffled positions i, i+k, i+2k, ...
KFoldPlan kfold_split(std::span<const std::string> ids, int k, std::uint64_t seed);

// Arithmetic mean of precision, recall and F1 across folds; counts are summed.
PRF aggregate_folds(std::span<const PRF> per_fold);

// {"precision": 40.08, ...}: percentages with exactly two decimals plus the
// raw tp/fp/fn counts.
std::string prf_to_json(const PRF& prf);
PRF prf_from_json(const std::string& text);

}  // namespace semrte
