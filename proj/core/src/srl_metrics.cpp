#include "semrte/srl_metrics.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "semrte/common.hpp"
#include "semrte/corpus.hpp"
#include "semrte/rng.hpp"

namespace semrte {

PRF PRF::from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  PRF r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  r.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

std::vector<std::string> KFoldPlan::fold_members(int fold) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (fold_of[i] == fold) out.push_back(ids[i]);
  }
  return out;
}

std::vector<std::size_t> KFoldPlan::fold_sizes() const {
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int f : fold_of) ++sizes[static_cast<std::size_t>(f)];
  return sizes;
}

std::vector<Span> extract_spans(std::span<const std::string> labels) {
  std::vector<Span> spans;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    IobTag tag = parse_iob_tag(labels[i]);
    switch (tag.kind) {
      case IobTag::Kind::kOutside:
        break;
      case IobTag::Kind::kBegin:
        spans.push_back({std::move(tag.role), i, i});
        break;
      case IobTag::Kind::kInside:
        // Grammar guarantees the previous tag opened this role.
        spans.back().end = i;
        break;
    }
  }
  return spans;
}

std::vector<std::string> spans_to_iob(std::span<const Span> spans, std::size_t length) {
  std::vector<std::string> labels(length, "O");
  for (const auto& s : spans) {
    if (s.start > s.end || s.end >= length) throw std::out_of_range("span outside sentence");
    labels[s.start] = "B-" + s.role;
    for (std::size_t i = s.start + 1; i <= s.end; ++i) labels[i] = "I-" + s.role;
  }
  return labels;
}

PRF span_prf(std::span<const std::vector<Span>> gold, std::span<const std::vector<Span>> pred) {
  if (gold.size() != pred.size()) {
    throw DataError("gold has " + std::to_string(gold.size()) + " sentences but prediction has " +
                    std::to_string(pred.size()));
  }
  std::size_t tp = 0, n_gold = 0, n_pred = 0;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    std::map<Span, std::size_t> gold_counts;
    for (const auto& span : gold[s]) ++gold_counts[span];
    for (const auto& span : pred[s]) {
      auto it = gold_counts.find(span);
      if (it != gold_counts.end() && it->second > 0) {
        --it->second;
        ++tp;
      }
    }
    n_gold += gold[s].size();
    n_pred += pred[s].size();
  }
  return PRF::from_counts(tp, n_pred - tp, n_gold - tp);
}

KFoldPlan kfold_split(std::span<const std::string> ids, int k, std::uint64_t seed) {
  if (k < 2 || static_cast<std::size_t>(k) > ids.size()) {
    throw std::invalid_argument("k must satisfy 2 <= k <= " + std::to_string(ids.size()) +
                                ", got " + std::to_string(k));
  }
  std::vector<std::size_t> order(ids.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);

  KFoldPlan plan;
  plan.k = k;
  plan.ids.assign(ids.begin(), ids.end());
  plan.fold_of.assign(ids.size(), 0);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    plan.fold_of[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  }
  return plan;
}

PRF aggregate_folds(std::span<const PRF> per_fold) {
  if (per_fold.empty()) throw std::invalid_argument("aggregate_folds needs at least one fold");
  PRF avg;
  for (const auto& f : per_fold) {
    avg.precision += f.precision;
    avg.recall += f.recall;
    avg.f1 += f.f1;
    avg.tp += f.tp;
    avg.fp += f.fp;
    avg.fn += f.fn;
  }
  const auto n = static_cast<double>(per_fold.size());
  avg.precision /= n;
  avg.recall /= n;
  avg.f1 /= n;
  return avg;
}

std::string prf_to_json(const PRF& prf) {
  // Written by hand so every percentage keeps exactly two decimals.
  auto pct = [](double v) { return format_percent(v); };
  return "{\"precision\": " + pct(prf.precision) + ", \"recall\": " + pct(prf.recall) + ", \"f1\": " +
         pct(prf.f1) + ", \"tp\": " + std::to_string(prf.tp) + ", \"fp\": " + std::to_string(prf.fp) +
         ", \"fn\": " + std::to_string(prf.fn) + "}";
}

PRF prf_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
    PRF r;
    r.precision = j.at("precision").get<double>() / 100.0;
    r.recall = j.at("recall").get<double>() / 100.0;
    r.f1 = j.at("f1").get<double>() / 100.0;
    r.tp = j.value("tp", std::size_t{0});
    r.fp = j.value("fp", std::size_t{0});
    r.fn = j.value("fn", std::size_t{0});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid PRF JSON: ") + e.what());
  }
}

}  // namespace semrte
