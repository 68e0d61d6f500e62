#include "semrte/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "semrte/evaluator.hpp"
#include "semrte/rng.hpp"

namespace semrte {

double cross_entropy(const std::array<double, 3>& probs, int gold) {
  return -std::log(probs.at(static_cast<std::size_t>(gold)));
}

double cross_entropy_from_logits(const std::array<double, 3>& logits, int gold) {
  double mx = logits[0];
  for (double z : logits) mx = std::max(mx, z);
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - mx);
  return -(logits.at(static_cast<std::size_t>(gold)) - mx) + std::log(sum);
}

template <typename T>
void adamw_step(std::span<Parameter<T>* const> params, std::span<const Matrix<T>> grads,
                AdamState<T>& state, const TrainConfig& cfg) {
  if (params.size() != grads.size()) throw std::invalid_argument("adamw_step: params and grads differ in count");
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
      state.v.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
    }
  }
  if (state.m.size() != params.size()) throw std::invalid_argument("adamw_step: optimizer state size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& w = params[i]->value;
    if (grads[i].rows() != w.rows() || grads[i].cols() != w.cols() || state.m[i].rows() != w.rows() ||
        state.m[i].cols() != w.cols()) {
      throw std::invalid_argument("adamw_step: shape mismatch for '" + params[i]->name + "'");
    }
  }
  ++state.step;
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T lr = static_cast<T>(cfg.learning_rate);
  const T eps = static_cast<T>(cfg.epsilon);
  const T c1 = T(1) - static_cast<T>(std::pow(cfg.beta1, static_cast<double>(state.step)));
  const T c2 = T(1) - static_cast<T>(std::pow(cfg.beta2, static_cast<double>(state.step)));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& w = params[i]->value;
    const auto& g = grads[i];
    state.m[i] = b1 * state.m[i] + (T(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (T(1) - b2) * g.cwiseProduct(g);
    const T wd = params[i]->decay ? static_cast<T>(cfg.weight_decay) : T(0);
    w.array() -= lr * ((state.m[i].array() / c1) / ((state.v[i].array() / c2).sqrt() + eps) + wd * w.array());
  }
}

template <typename T>
BatchGradients<T> batch_gradients(const SemanticRteModel<T>& model, std::span<const EncodedExample> batch,
                                  const ForwardMode& mode) {
  const auto params = model.parameters();
  std::unordered_map<const Parameter<T>*, std::size_t> index;
  BatchGradients<T> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    index.emplace(params[i], i);
    out.grads.push_back(Matrix<T>::Zero(params[i]->value.rows(), params[i]->value.cols()));
  }
  if (batch.empty()) return out;
  const T inv = T(1) / static_cast<T>(batch.size());
  for (const auto& ex : batch) {
    ag::Tape<T> tape;
    const ag::Var loss = ag::cross_entropy(tape, model.logits(tape, ex, mode), ex.gold);
    out.loss += static_cast<double>(tape.value(loss)(0, 0));
    tape.backward(loss);
    tape.for_each_param_grad([&](const Parameter<T>& p, const Matrix<T>& g) {
      auto it = index.find(&p);
      if (it == index.end()) throw std::logic_error("gradient for a parameter outside the model");
      out.grads[it->second] += inv * g;
    });
  }
  out.loss /= static_cast<double>(batch.size());
  return out;
}

template <typename T>
double batch_loss(const SemanticRteModel<T>& model, std::span<const EncodedExample> batch) {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : batch) {
    ag::Tape<T> tape;
    total += static_cast<double>(tape.value(ag::cross_entropy(tape, model.logits(tape, ex), ex.gold))(0, 0));
  }
  return total / static_cast<double>(batch.size());
}

std::vector<std::vector<std::size_t>> plan_batches(std::size_t n, int batch_size, Rng& rng) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> batches;
  const auto b = static_cast<std::size_t>(batch_size);
  for (std::size_t start = 0; start < n; start += b) {
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(std::min(n, start + b)));
  }
  return batches;
}

std::string train_log_to_jsonl(const TrainLog& log) {
  std::string out;
  for (const auto& e : log.epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["val_accuracy"] = e.val_accuracy;
    j["val_f1"] = e.val_f1;
    j["steps"] = e.steps;
    j["wall_seconds"] = e.wall_seconds;
    j["best"] = e.epoch == log.best_epoch;
    if (e.epoch == log.best_epoch && !log.checkpoint_path.empty()) j["checkpoint"] = log.checkpoint_path;
    out += j.dump() + "\n";
  }
  return out;
}

TrainLog train(SemanticRteModel<float>& model, std::span<const EncodedExample> train_set,
               std::span<const EncodedExample> val_set, const TrainConfig& cfg, const TrainOptions& options) {
  cfg.validate();
  if (train_set.empty()) throw std::invalid_argument("train: empty training set");
  auto params = model.parameters();
  AdamState<float> state;
  Rng shuffle_rng(cfg.seed + seed_offset::kShuffle);
  Rng dropout_rng(cfg.seed + seed_offset::kDropout);
  const ForwardMode mode{true, &dropout_rng};

  TrainLog log;
  std::vector<Matrix<float>> best;
  double best_f1 = -1.0;
  std::vector<EncodedExample> batch;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    EpochRecord rec;
    rec.epoch = epoch;
    double loss_sum = 0.0;
    for (const auto& idx : plan_batches(train_set.size(), cfg.batch_size, shuffle_rng)) {
      batch.clear();
      for (auto i : idx) batch.push_back(train_set[i]);
      auto bg = batch_gradients(model, std::span<const EncodedExample>(batch), mode);
      loss_sum += bg.loss * static_cast<double>(batch.size());
      if (cfg.max_grad_norm > 0.0) {
        double sq = 0.0;
        for (const auto& g : bg.grads) sq += static_cast<double>(g.squaredNorm());
        const double norm = std::sqrt(sq);
        if (norm > cfg.max_grad_norm) {
          const auto s = static_cast<float>(cfg.max_grad_norm / norm);
          for (auto& g : bg.grads) g *= s;
        }
      }
      adamw_step<float>(params, bg.grads, state, cfg);
      ++rec.steps;
    }
    rec.train_loss = loss_sum / static_cast<double>(train_set.size());
    const bool has_val = !val_set.empty();
    if (has_val) {
      const Metrics m = overall_metrics(predict(model, val_set));
      rec.val_accuracy = m.accuracy;
      rec.val_f1 = m.f1;
    }
    const double score = has_val ? rec.val_f1 : static_cast<double>(epoch);
    if (score > best_f1) {
      best_f1 = score;
      log.best_epoch = epoch;
      best.clear();
      for (const auto* p : params) best.push_back(p->value);
    }
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log.epochs.push_back(rec);
    if (options.on_epoch) options.on_epoch(rec);
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = best[i];
  if (!options.checkpoint_path.empty()) {
    CheckpointMeta meta = options.meta;
    meta.train = cfg;
    save_checkpoint(options.checkpoint_path, model, meta);
    log.checkpoint_path = options.checkpoint_path;
  }
  return log;
}

GradCheckReport grad_check(SemanticRteModel<double>& model, std::span<const EncodedExample> batch,
                           const GradCheckOptions& options) {
  auto analytic = batch_gradients(static_cast<const SemanticRteModel<double>&>(model), batch).grads;
  if (options.corrupt) options.corrupt(analytic);
  auto params = model.parameters();
  GradCheckReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter<double>& p = *params[i];
    auto& group_err = report.max_rel_error[p.group];
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      double& x = p.value.data()[k];
      const double saved = x;
      x = saved + options.step;
      const double up = batch_loss(model, batch);
      x = saved - options.step;
      const double down = batch_loss(model, batch);
      x = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double a = analytic[i].data()[k];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), options.abs_floor});
      group_err = std::max(group_err, rel);
      ++report.checked[p.group];
      if (rel > report.worst) {
        report.worst = rel;
        report.worst_param = p.name + "[" + std::to_string(k) + "]";
      }
    }
  }
  report.passed = report.worst < options.tolerance;
  return report;
}

template void adamw_step<float>(std::span<Parameter<float>* const>, std::span<const Matrix<float>>,
                                AdamState<float>&, const TrainConfig&);
template void adamw_step<double>(std::span<Parameter<double>* const>, std::span<const Matrix<double>>,
                                 AdamState<double>&, const TrainConfig&);
template BatchGradients<float> batch_gradients<float>(const SemanticRteModel<float>&,
                                                      std::span<const EncodedExample>, const ForwardMode&);
template BatchGradients<double> batch_gradients<double>(const SemanticRteModel<double>&,
                                                        std::span<const EncodedExample>, const ForwardMode&);
template double batch_loss<float>(const SemanticRteModel<float>&, std::span<const EncodedExample>);
template double batch_loss<double>(const SemanticRteModel<double>&, std::span<const EncodedExample>);

}  // namespace semrte
