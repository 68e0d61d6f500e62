#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "semrte/checkpoint.hpp"
#include "semrte/config.hpp"
#include "semrte/fusion.hpp"

namespace semrte {

// -log probs[gold].
double cross_entropy(const std::array<double, 3>& probs, int gold);
// Same loss from logits, -z[gold] + log(sum exp z), computed stably.
double cross_entropy_from_logits(const std::array<double, 3>& logits, int gold);

template <typename T>
struct AdamState {
  std::vector<Matrix<T>> m;
  std::vector<Matrix<T>> v;
  std::int64_t step = 0;
};

// One decoupled-decay Adam update:
//   theta -= lr * (m_hat / (sqrt(v_hat) + eps) + wd * theta)
// where wd is cfg.weight_decay for parameters with decay set and 0 otherwise.
// State buffers are created on the first call. Throws std::invalid_argument
// when shapes disagree.
template <typename T>
void adamw_step(std::span<Parameter<T>* const> params, std::span<const Matrix<T>> grads,
                AdamState<T>& state, const TrainConfig& cfg);

// Mean loss and its gradient (one matrix per model parameter, in
// parameters() order) over a batch.
template <typename T>
struct BatchGradients {
  double loss = 0.0;
  std::vector<Matrix<T>> grads;
};
template <typename T>
BatchGradients<T> batch_gradients(const SemanticRteModel<T>& model, std::span<const EncodedExample> batch,
                                  const ForwardMode& mode = {});

template <typename T>
double batch_loss(const SemanticRteModel<T>& model, std::span<const EncodedExample> batch);

// Index batches for one epoch: a seeded permutation of [0, n) cut into
// ceil(n / batch_size) batches, the last one possibly short.
std::vector<std::vector<std::size_t>> plan_batches(std::size_t n, int batch_size, Rng& rng);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;  // mean over training examples
  double val_accuracy = 0.0;
  double val_f1 = 0.0;
  double wall_seconds = 0.0;
  std::int64_t steps = 0;  // optimizer steps taken in this epoch
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  std::string checkpoint_path;
};

// One JSON record per epoch.
std::string train_log_to_jsonl(const TrainLog& log);

struct TrainOptions {
  // When non-empty the best-validation checkpoint is written here.
  std::string checkpoint_path;
  CheckpointMeta meta;
  // Called after each epoch.
  std::function<void(const EpochRecord&)> on_epoch;
};

// Trains in place. Each epoch shuffles with a generator seeded from
// cfg.seed, takes one AdamW step per batch on the mean batch loss, then
// scores the validation set. At the end the parameters of the epoch with the
// best validation weighted F1 (earliest on ties; the last epoch when there
// is no validation set) are restored. Throws std::invalid_argument on an
// empty training set.
TrainLog train(SemanticRteModel<float>& model, std::span<const EncodedExample> train_set,
               std::span<const EncodedExample> val_set, const TrainConfig& cfg,
               const TrainOptions& options = {});

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor of the relative error.
  double abs_floor = 1e-6;
  // Applied to the analytic gradients before comparison (fault injection).
  std::function<void(std::vector<Matrix<double>>&)> corrupt;
};

struct GradCheckReport {
  std::map<std::string, double> max_rel_error;  // by parameter group
  std::map<std::string, std::size_t> checked;    // elements compared per group
  double worst = 0.0;
  std::string worst_param;
  bool passed = false;
};

// Central differences on every element of every parameter of the mean batch
// loss. rel = |a - n| / max(|a|, |n|, abs_floor).
GradCheckReport grad_check(SemanticRteModel<double>& model, std::span<const EncodedExample> batch,
                           const GradCheckOptions& options = {});

}  // namespace semrte
