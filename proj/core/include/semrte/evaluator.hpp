#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "semrte/common.hpp"
#include "semrte/fusion.hpp"

namespace semrte {

struct Prediction {
  std::string id;
  Label predicted = Label::kNeutral;
  Label gold = Label::kNeutral;
  Lang lang = Lang::kVie;
  int predicates1 = 0;
  int predicates2 = 0;
};

// counts[gold][predicted]
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, kNumLabels>, kNumLabels> counts{};

  std::int64_t total() const;
  std::int64_t support(Label gold) const;
  void add(Label gold, Label predicted) { ++counts[label_index(gold)][label_index(predicted)]; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_of(std::span<const Prediction> preds);

// Fractions in [0, 1]; precision/recall/f1 are support-weighted averages of
// the per-class values (a class with no predictions has precision 0).
struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::int64_t support = 0;
  ConfusionMatrix confusion;
};

Metrics metrics_from_confusion(const ConfusionMatrix& cm);
// Throws std::invalid_argument on an empty input.
Metrics overall_metrics(std::span<const Prediction> preds);

// Languages absent from the input are absent from the result.
std::map<Lang, Metrics> per_language(std::span<const Prediction> preds);

struct LabelErrors {
  std::array<double, kNumLabels> rate{};  // wrong / support, 0 when support is 0
  std::array<std::int64_t, kNumLabels> wrong{};
  std::array<std::int64_t, kNumLabels> support{};
};
LabelErrors per_label_error(std::span<const Prediction> preds);

struct SweepEntry {
  int m = 0;
  Metrics metrics;
};
// Produces the predictions of a model trained with m aspects.
using SweepRunner = std::function<std::vector<Prediction>(int m)>;
// Runs `run` once per m (each in [1, 5]) and scores the result.
std::vector<SweepEntry> aspect_sweep(const SweepRunner& run, std::span<const int> m_values);

// Everything the report commands emit for one model.
struct MetricReport {
  std::string model;
  Metrics overall;
  std::map<Lang, Metrics> by_language;
  LabelErrors label_errors;
  std::vector<SweepEntry> sweep;
};
MetricReport build_report(std::string model, std::span<const Prediction> preds);

// Flat view: key -> value in hundredths of a percent, e.g.
// "overall.f1" -> 7470, "eng.accuracy", "error.neutral", "sweep.m3".
std::map<std::string, std::int64_t> flatten_report(const MetricReport& report);

// b - a per key in hundredths. Throws DataError when key sets differ.
std::map<std::string, std::int64_t> compare_runs(const std::map<std::string, std::int64_t>& a,
                                                 const std::map<std::string, std::int64_t>& b);

// JSON with every percentage written with exactly two decimals.
std::string report_to_json(const MetricReport& report);
std::map<std::string, std::int64_t> flat_report_from_json(const std::string& text);
std::string deltas_to_json(const std::map<std::string, std::int64_t>& deltas);

// Aligned plain-text tables, one model per row.
std::string format_overall_table(std::span<const MetricReport> reports);
std::string format_language_table(std::span<const MetricReport> reports);
std::string format_label_error_table(std::span<const MetricReport> reports);
std::string format_sweep_table(std::span<const MetricReport> reports);
std::string format_delta_table(const std::map<std::string, std::int64_t>& deltas);

// argmax of the model's probabilities (first index on ties).
std::vector<Prediction> predict(const SemanticRteModel<float>& model,
                                std::span<const EncodedExample> examples);

}  // namespace semrte
