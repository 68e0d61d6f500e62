#include "semrte/evaluator.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "semrte/autograd.hpp"

namespace semrte {

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

std::int64_t ConfusionMatrix::support(Label gold) const {
  std::int64_t s = 0;
  for (auto c : counts[label_index(gold)]) s += c;
  return s;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (int g = 0; g < kNumLabels; ++g) {
    for (int p = 0; p < kNumLabels; ++p) counts[g][p] += other.counts[g][p];
  }
  return *this;
}

ConfusionMatrix confusion_of(std::span<const Prediction> preds) {
  ConfusionMatrix cm;
  for (const auto& p : preds) cm.add(p.gold, p.predicted);
  return cm;
}

Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
  Metrics m;
  m.confusion = cm;
  m.support = cm.total();
  if (m.support == 0) throw std::invalid_argument("metrics of an empty prediction set");
  std::int64_t correct = 0;
  for (int c = 0; c < kNumLabels; ++c) {
    const std::int64_t tp = cm.counts[c][c];
    std::int64_t gold = 0, predicted = 0;
    for (int k = 0; k < kNumLabels; ++k) {
      gold += cm.counts[c][k];
      predicted += cm.counts[k][c];
    }
    correct += tp;
    if (gold == 0) continue;
    const double p = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    const double r = static_cast<double>(tp) / static_cast<double>(gold);
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    const double w = static_cast<double>(gold) / static_cast<double>(m.support);
    m.precision += w * p;
    m.recall += w * r;
    m.f1 += w * f;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.support);
  return m;
}

Metrics overall_metrics(std::span<const Prediction> preds) {
  if (preds.empty()) throw std::invalid_argument("overall_metrics: no predictions");
  return metrics_from_confusion(confusion_of(preds));
}

std::map<Lang, Metrics> per_language(std::span<const Prediction> preds) {
  std::map<Lang, ConfusionMatrix> parts;
  for (const auto& p : preds) parts[p.lang].add(p.gold, p.predicted);
  std::map<Lang, Metrics> out;
  for (const auto& [lang, cm] : parts) out.emplace(lang, metrics_from_confusion(cm));
  return out;
}

LabelErrors per_label_error(std::span<const Prediction> preds) {
  LabelErrors e;
  for (const auto& p : preds) {
    const auto g = static_cast<std::size_t>(label_index(p.gold));
    ++e.support[g];
    if (p.predicted != p.gold) ++e.wrong[g];
  }
  for (std::size_t g = 0; g < e.rate.size(); ++g) {
    e.rate[g] = e.support[g] ? static_cast<double>(e.wrong[g]) / static_cast<double>(e.support[g]) : 0.0;
  }
  return e;
}

std::vector<SweepEntry> aspect_sweep(const SweepRunner& run, std::span<const int> m_values) {
  for (int m : m_values) {
    if (m < 1 || m > 5) throw std::invalid_argument("sweep value m=" + std::to_string(m) + " outside [1, 5]");
  }
  std::vector<SweepEntry> out;
  for (int m : m_values) {
    const auto preds = run(m);
    out.push_back({m, overall_metrics(preds)});
  }
  return out;
}

MetricReport build_report(std::string model, std::span<const Prediction> preds) {
  MetricReport r;
  r.model = std::move(model);
  r.overall = overall_metrics(preds);
  r.by_language = per_language(preds);
  r.label_errors = per_label_error(preds);
  return r;
}

namespace {

std::int64_t hund(double fraction) { return to_hundredths(fraction * 100.0); }

void flatten_metrics(std::map<std::string, std::int64_t>& out, const std::string& prefix, const Metrics& m) {
  out[prefix + ".accuracy"] = hund(m.accuracy);
  out[prefix + ".precision"] = hund(m.precision);
  out[prefix + ".recall"] = hund(m.recall);
  out[prefix + ".f1"] = hund(m.f1);
}

std::string metrics_json(const Metrics& m) {
  return "{\"accuracy\": " + format_percent(m.accuracy) + ", \"precision\": " + format_percent(m.precision) +
         ", \"recall\": " + format_percent(m.recall) + ", \"f1\": " + format_percent(m.f1) +
         ", \"support\": " + std::to_string(m.support) + "}";
}

std::string pad(std::string s, std::size_t width, bool left = false) {
  if (s.size() >= width) return s;
  const std::string fill(width - s.size(), ' ');
  return left ? s + fill : fill + s;
}

std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      line += pad(row[c], widths[c], c == 0);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace

std::map<std::string, std::int64_t> flatten_report(const MetricReport& report) {
  std::map<std::string, std::int64_t> out;
  flatten_metrics(out, "overall", report.overall);
  for (const auto& [lang, m] : report.by_language) flatten_metrics(out, std::string(to_string(lang)), m);
  for (Label l : kAllLabels) {
    out["error." + std::string(to_string(l))] = hund(report.label_errors.rate[static_cast<std::size_t>(label_index(l))]);
  }
  for (const auto& s : report.sweep) out["sweep.m" + std::to_string(s.m)] = hund(s.metrics.f1);
  return out;
}

std::map<std::string, std::int64_t> compare_runs(const std::map<std::string, std::int64_t>& a,
                                                 const std::map<std::string, std::int64_t>& b) {
  std::map<std::string, std::int64_t> delta;
  for (const auto& [key, va] : a) {
    auto it = b.find(key);
    if (it == b.end()) throw DataError("reports differ in schema: '" + key + "' missing from the second");
    delta[key] = it->second - va;
  }
  for (const auto& [key, vb] : b) {
    if (!a.count(key)) throw DataError("reports differ in schema: '" + key + "' missing from the first");
  }
  return delta;
}

std::string report_to_json(const MetricReport& report) {
  std::ostringstream os;
  os << "{\n  \"model\": " << nlohmann::json(report.model).dump() << ",\n";
  os << "  \"overall\": " << metrics_json(report.overall) << ",\n";
  os << "  \"per_language\": {";
  bool first = true;
  for (const auto& [lang, m] : report.by_language) {
    os << (first ? "\n" : ",\n") << "    \"" << to_string(lang) << "\": " << metrics_json(m);
    first = false;
  }
  os << (first ? "},\n" : "\n  },\n");
  os << "  \"per_label_error\": {";
  for (std::size_t i = 0; i < kAllLabels.size(); ++i) {
    os << (i ? ", " : "") << "\"" << to_string(kAllLabels[i]) << "\": " << format_percent(report.label_errors.rate[i]);
  }
  os << "},\n  \"aspect_sweep\": {";
  for (std::size_t i = 0; i < report.sweep.size(); ++i) {
    os << (i ? ", " : "") << "\"" << report.sweep[i].m << "\": " << format_percent(report.sweep[i].metrics.f1);
  }
  os << "}\n}\n";
  return os.str();
}

std::map<std::string, std::int64_t> flat_report_from_json(const std::string& text) {
  std::map<std::string, std::int64_t> out;
  try {
    const auto j = nlohmann::json::parse(text);
    auto metrics = [&](const std::string& prefix, const nlohmann::json& m) {
      for (const char* k : {"accuracy", "precision", "recall", "f1"}) out[prefix + "." + k] = to_hundredths(m.at(k).get<double>());
    };
    metrics("overall", j.at("overall"));
    for (const auto& [lang, m] : j.at("per_language").items()) metrics(lang, m);
    for (const auto& [label, v] : j.at("per_label_error").items()) out["error." + label] = to_hundredths(v.get<double>());
    if (j.contains("aspect_sweep")) {
      for (const auto& [m, v] : j.at("aspect_sweep").items()) out["sweep.m" + m] = to_hundredths(v.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed metric report: ") + e.what());
  }
  return out;
}

std::string deltas_to_json(const std::map<std::string, std::int64_t>& deltas) {
  std::string out = "{";
  bool first = true;
  for (const auto& [k, v] : deltas) {
    out += (first ? "\n  \"" : ",\n  \"") + k + "\": " + format_hundredths(v);
    first = false;
  }
  out += first ? "}\n" : "\n}\n";
  return out;
}

std::string format_overall_table(std::span<const MetricReport> reports) {
  std::vector<std::vector<std::string>> rows{{"Model", "Accuracy", "Precision", "Recall", "F1-score"}};
  for (const auto& r : reports) {
    rows.push_back({r.model, format_percent(r.overall.accuracy), format_percent(r.overall.precision),
                    format_percent(r.overall.recall), format_percent(r.overall.f1)});
  }
  return render(rows);
}

std::string format_language_table(std::span<const MetricReport> reports) {
  std::vector<std::vector<std::string>> rows{{"Model", "Language", "Accuracy", "Precision", "Recall", "F1-score"}};
  for (const auto& r : reports) {
    for (const auto& [lang, m] : r.by_language) {
      rows.push_back({r.model, std::string(to_string(lang)), format_percent(m.accuracy), format_percent(m.precision),
                      format_percent(m.recall), format_percent(m.f1)});
    }
  }
  return render(rows);
}

std::string format_label_error_table(std::span<const MetricReport> reports) {
  std::vector<std::vector<std::string>> rows{{"Model"}};
  for (Label l : kAllLabels) rows[0].push_back(std::string(to_string(l)));
  for (const auto& r : reports) {
    std::vector<std::string> row{r.model};
    for (double v : r.label_errors.rate) row.push_back(format_percent(v));
    rows.push_back(std::move(row));
  }
  return render(rows);
}

std::string format_sweep_table(std::span<const MetricReport> reports) {
  std::vector<int> ms;
  for (const auto& r : reports) {
    for (const auto& s : r.sweep) {
      if (std::find(ms.begin(), ms.end(), s.m) == ms.end()) ms.push_back(s.m);
    }
  }
  std::sort(ms.begin(), ms.end());
  std::vector<std::vector<std::string>> rows{{"Model"}};
  for (int m : ms) rows[0].push_back(std::to_string(m));
  for (const auto& r : reports) {
    std::vector<std::string> row{r.model};
    for (int m : ms) {
      auto it = std::find_if(r.sweep.begin(), r.sweep.end(), [m](const SweepEntry& s) { return s.m == m; });
      row.push_back(it == r.sweep.end() ? "-" : format_percent(it->metrics.f1));
    }
    rows.push_back(std::move(row));
  }
  return render(rows);
}

std::string format_delta_table(const std::map<std::string, std::int64_t>& deltas) {
  std::vector<std::vector<std::string>> rows{{"Metric", "Delta"}};
  for (const auto& [k, v] : deltas) rows.push_back({k, (v > 0 ? "+" : "") + format_hundredths(v)});
  return render(rows);
}

std::vector<Prediction> predict(const SemanticRteModel<float>& model, std::span<const EncodedExample> examples) {
  std::vector<Prediction> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    ag::Tape<float> tape;
    const auto& z = tape.value(model.logits(tape, ex));
    int best = 0;
    for (int c = 1; c < FusionConfig::kNumClasses; ++c) {
      if (z(0, c) > z(0, best)) best = c;
    }
    Prediction p;
    p.id = ex.id;
    p.predicted = kAllLabels[static_cast<std::size_t>(best)];
    p.gold = kAllLabels[static_cast<std::size_t>(ex.gold)];
    p.lang = ex.lang;
    p.predicates1 = ex.predicates1;
    p.predicates2 = ex.predicates2;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace semrte
