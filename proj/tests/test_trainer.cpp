#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "semrte/experiment.hpp"
#include "semrte/fixtures.hpp"
#include "semrte/rng.hpp"
#include "semrte/trainer.hpp"

using namespace semrte;

namespace {

struct Data {
  std::vector<EncodedExample> examples;
  int vocab_size = 0;
  int num_tags = 0;
};

Data encoded(FixtureKind kind, std::size_t n, std::uint64_t seed, int max_length = 256) {
  const auto fx = generate_fixture(kind, {n, 0, 0}, seed);
  const auto index = index_aspects(fx.aspects);
  const auto vocab = vocab_of(fx.train, 3);
  const auto inventory = inventory_of(fx.aspects);
  return {encode_pairs(fx.train, index, vocab, inventory, 2, max_length), vocab.size(),
          static_cast<int>(inventory.size())};
}

EncoderConfig tiny_encoder() {
  EncoderConfig e;
  e.d_model = 8;
  e.layers = 1;
  e.heads = 2;
  e.ffn_dim = 16;
  e.max_length = 64;
  return e;
}

// The float64 micro configuration used for gradient checks, with weights
// moved away from the small initialization so every path carries gradient.
SemanticRteModel<double> micro_model(const Data& d) {
  EncoderConfig e = tiny_encoder();
  e.heads = 1;
  e.seed = 3;
  FusionConfig f;
  f.label_embed_dim = 4;
  f.gru_hidden = 4;
  f.sem_proj_dim = 6;
  SemanticRteModel<double> model(e, f, d.vocab_size, d.num_tags);
  Rng rng(9);
  for (auto* p : model.parameters()) {
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] += 0.3 * rng.normal();
  }
  return model;
}

std::vector<Matrix<float>> snapshot(const SemanticRteModel<float>& model) {
  std::vector<Matrix<float>> out;
  for (const auto* p : model.parameters()) out.push_back(p->value);
  return out;
}

}  // namespace

TEST_CASE("cross entropy") {
  CHECK(cross_entropy({1.0 / 3, 1.0 / 3, 1.0 / 3}, 1) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(cross_entropy({1.0 - 1e-12, 5e-13, 5e-13}, 0) < 1e-11);
  CHECK(cross_entropy_from_logits({0.0, 0.0, 0.0}, 2) == doctest::Approx(std::log(3.0)).epsilon(1e-15));

  Rng rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<double, 3> z{};
    for (auto& v : z) v = 20.0 * rng.normal();
    const int gold = static_cast<int>(rng.uniform_index(3));
    long double sum = 0;
    for (double v : z) sum += std::exp(static_cast<long double>(v));
    const double oracle = static_cast<double>(-static_cast<long double>(z[static_cast<std::size_t>(gold)]) + std::log(sum));
    CHECK(std::abs(cross_entropy_from_logits(z, gold) - oracle) <= 1e-9 * std::max(1.0, std::abs(oracle)));
  }
  // Logits far outside the exp range stay finite.
  CHECK(cross_entropy_from_logits({1000.0, 0.0, -1000.0}, 1) == doctest::Approx(1000.0));
}

TEST_CASE("adamw with zero gradient applies only decoupled decay") {
  Parameter<double> w{"w", "g", Matrix<double>::Constant(2, 3, 1.5), true};
  Parameter<double> b{"b", "g", Matrix<double>::Constant(1, 3, 0.5), false};
  std::vector<Parameter<double>*> ps{&w, &b};
  const std::vector<Matrix<double>> grads{Matrix<double>::Zero(2, 3), Matrix<double>::Zero(1, 3)};
  AdamState<double> state;
  TrainConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.weight_decay = 0.01;
  adamw_step<double>(ps, grads, state, cfg);
  for (Eigen::Index i = 0; i < w.value.size(); ++i) CHECK(w.value.data()[i] == doctest::Approx(1.5 * (1 - 1e-4)).epsilon(1e-15));
  CHECK(b.value == Matrix<double>::Constant(1, 3, 0.5));
  CHECK(state.step == 1);
}

TEST_CASE("adamw single step and second step closed forms") {
  const double lr = 1e-3, eps = 1e-8, b1 = 0.9, b2 = 0.999;
  Rng rng(2);
  Matrix<double> theta0(3, 3), g1(3, 3), g2(3, 3);
  for (Eigen::Index i = 0; i < 9; ++i) {
    theta0.data()[i] = rng.normal();
    g1.data()[i] = rng.normal();
    g2.data()[i] = rng.normal();
  }
  Parameter<double> w{"w", "g", theta0, true};
  std::vector<Parameter<double>*> ps{&w};
  AdamState<double> state;
  TrainConfig cfg;
  cfg.learning_rate = lr;
  cfg.weight_decay = 0.0;
  adamw_step<double>(ps, std::vector<Matrix<double>>{g1}, state, cfg);
  for (Eigen::Index i = 0; i < 9; ++i) {
    const double g = g1.data()[i];
    // m_hat = g and v_hat = g^2 after one step.
    CHECK(w.value.data()[i] == doctest::Approx(theta0.data()[i] - lr * g / (std::abs(g) + eps)).epsilon(1e-14));
    CHECK(std::abs(w.value.data()[i] - theta0.data()[i]) <= lr);
  }
  const Matrix<double> theta1 = w.value;
  cfg.weight_decay = 0.05;
  adamw_step<double>(ps, std::vector<Matrix<double>>{g2}, state, cfg);
  for (Eigen::Index i = 0; i < 9; ++i) {
    const double a = g1.data()[i], c = g2.data()[i];
    const double m = b1 * (1 - b1) * a + (1 - b1) * c;
    const double v = b2 * (1 - b2) * a * a + (1 - b2) * c * c;
    const double mh = m / (1 - b1 * b1), vh = v / (1 - b2 * b2);
    const double expect = theta1.data()[i] - lr * (mh / (std::sqrt(vh) + eps) + 0.05 * theta1.data()[i]);
    CHECK(w.value.data()[i] == doctest::Approx(expect).epsilon(1e-13));
  }
}

TEST_CASE("adamw shape checks") {
  Parameter<double> w{"w", "g", Matrix<double>::Zero(2, 2), true};
  std::vector<Parameter<double>*> ps{&w};
  AdamState<double> state;
  TrainConfig cfg;
  CHECK_THROWS_AS(adamw_step<double>(ps, std::vector<Matrix<double>>{Matrix<double>::Zero(2, 3)}, state, cfg),
                  std::invalid_argument);
  CHECK_THROWS_AS(adamw_step<double>(ps, std::vector<Matrix<double>>{}, state, cfg), std::invalid_argument);
}

TEST_CASE("plan_batches") {
  Rng rng(3);
  const auto plan = plan_batches(16185, 12, rng);
  CHECK(plan.size() == 1349);
  CHECK(plan.back().size() == 16185 - 1348 * 12);
  std::vector<std::size_t> all;
  for (const auto& b : plan) all.insert(all.end(), b.begin(), b.end());
  std::sort(all.begin(), all.end());
  std::vector<std::size_t> expect(16185);
  std::iota(expect.begin(), expect.end(), std::size_t{0});
  CHECK(all == expect);
  Rng again(3);
  CHECK(plan_batches(16185, 12, again) == plan);
  CHECK(plan_batches(12, 12, rng).size() == 1);
}

TEST_CASE("step counter and log shape") {
  const auto d = encoded(FixtureKind::kSeparable, 25, 4, 64);
  SemanticRteModel<float> model(tiny_encoder(), FusionConfig{}, d.vocab_size, d.num_tags);
  TrainConfig cfg = TrainConfig::toy();
  cfg.epochs = 3;
  cfg.max_length = 64;
  int calls = 0;
  TrainOptions opt;
  opt.on_epoch = [&](const EpochRecord& r) { CHECK(r.epoch == ++calls); };
  const auto log = train(model, d.examples, {}, cfg, opt);
  REQUIRE(log.epochs.size() == 3);
  for (const auto& r : log.epochs) CHECK(r.steps == 3);  // ceil(25 / 12)
  CHECK(log.best_epoch == 3);
  const auto jsonl = train_log_to_jsonl(log);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') == 3);

  CHECK_THROWS_AS(train(model, std::span<const EncodedExample>{}, {}, cfg), std::invalid_argument);
}

TEST_CASE("zero learning rate freezes the model") {
  const auto d = encoded(FixtureKind::kSeparable, 20, 5, 64);
  SemanticRteModel<float> model(tiny_encoder(), FusionConfig{}, d.vocab_size, d.num_tags);
  const auto before = snapshot(model);
  TrainConfig cfg = TrainConfig::toy();
  cfg.learning_rate = 0.0;
  cfg.epochs = 3;
  const auto log = train(model, d.examples, {}, cfg);
  CHECK(snapshot(model) == before);
  for (const auto& r : log.epochs) CHECK(r.train_loss == doctest::Approx(log.epochs[0].train_loss).epsilon(1e-6));
}

TEST_CASE("best validation epoch is restored") {
  const auto d = encoded(FixtureKind::kSeparable, 40, 6, 64);
  const std::span<const EncodedExample> all(d.examples);
  SemanticRteModel<float> model(tiny_encoder(), FusionConfig{}, d.vocab_size, d.num_tags);
  TrainConfig cfg = TrainConfig::toy();
  cfg.learning_rate = 1e-3;
  cfg.epochs = 6;
  const auto log = train(model, all.first(28), all.subspan(28), cfg);
  int best = 1;
  for (const auto& r : log.epochs) {
    if (r.val_f1 > log.epochs[static_cast<std::size_t>(best - 1)].val_f1) best = r.epoch;
  }
  CHECK(log.best_epoch == best);
  const auto preds = predict(model, all.subspan(28));
  CHECK(overall_metrics(preds).f1 == doctest::Approx(log.epochs[static_cast<std::size_t>(best - 1)].val_f1).epsilon(1e-12));
}

TEST_CASE("seeded training is deterministic") {
  const auto d = encoded(FixtureKind::kSeparable, 20, 7, 64);
  TrainConfig cfg = TrainConfig::toy();
  cfg.epochs = 3;
  cfg.seed = 11;
  SemanticRteModel<float> a(tiny_encoder(), FusionConfig{}, d.vocab_size, d.num_tags);
  SemanticRteModel<float> b = a;
  const auto la = train(a, d.examples, {}, cfg);
  const auto lb = train(b, d.examples, {}, cfg);
  CHECK(snapshot(a) == snapshot(b));
  REQUIRE(la.epochs.size() == lb.epochs.size());
  for (std::size_t i = 0; i < la.epochs.size(); ++i) CHECK(la.epochs[i].train_loss == lb.epochs[i].train_loss);

  cfg.seed = 12;
  SemanticRteModel<float> c(tiny_encoder(), FusionConfig{}, d.vocab_size, d.num_tags);
  train(c, d.examples, {}, cfg);
  CHECK(snapshot(c) != snapshot(a));
}

TEST_CASE("gradient check on the micro configuration") {
  const auto d = encoded(FixtureKind::kAspectSignal, 2, 5, 64);
  auto model = micro_model(d);
  const auto report = grad_check(model, d.examples);
  for (const char* g : {"embeddings", "attention", "ffn", "cnn_alignment", "label_embeddings", "gru", "projection",
                        "classifier"}) {
    CAPTURE(g);
    REQUIRE(report.checked.count(g) == 1);
    CHECK(report.checked.at(g) > 0);
    CHECK(report.max_rel_error.at(g) < 1e-4);
  }
  CHECK(report.passed);

  GradCheckOptions bad;
  bad.corrupt = [](std::vector<Matrix<double>>& grads) {
    for (auto& g : grads) {
      for (Eigen::Index i = 0; i < g.size(); ++i) {
        if (std::abs(g.data()[i]) > 1e-3) {
          g.data()[i] *= 2.0;
          return;
        }
      }
    }
  };
  const auto corrupted = grad_check(model, d.examples, bad);
  CHECK_FALSE(corrupted.passed);
  CHECK(corrupted.worst > 0.3);
}

TEST_CASE("gradient check on a zero-loss batch") {
  auto d = encoded(FixtureKind::kAspectSignal, 6, 5, 64);
  std::vector<EncodedExample> same;
  for (const auto& ex : d.examples) {
    if (ex.gold == d.examples[0].gold) same.push_back(ex);
  }
  auto model = micro_model(d);
  model.classifier.weight.value.setZero();
  model.classifier.bias.value.setZero();
  model.classifier.bias.value(0, same[0].gold) = 1e4;
  CHECK(batch_loss(model, same) == 0.0);
  const auto report = grad_check(model, same);
  // The vectorized exp saturates at the bottom of the double range rather
  // than flushing to zero, so the gradients are tiny subnormals, not 0.
  CAPTURE(report.worst_param);
  CHECK(report.worst < 1e-290);
  CHECK(report.passed);
}

TEST_CASE("training loss is monotone within a 5% band") {
  const auto d = encoded(FixtureKind::kSeparable, 32, 7);
  EncoderConfig e;
  e.seed = 2;
  SemanticRteModel<float> model(e, FusionConfig{}, d.vocab_size, d.num_tags);
  TrainConfig cfg = TrainConfig::toy();
  cfg.epochs = 40;
  std::vector<double> losses{batch_loss(model, d.examples)};
  TrainOptions opt;
  opt.on_epoch = [&](const EpochRecord&) { losses.push_back(batch_loss(model, d.examples)); };
  train(model, d.examples, {}, cfg, opt);
  double best = losses[0];
  for (std::size_t i = 1; i < losses.size(); ++i) {
    CAPTURE(i);
    CHECK(losses[i] <= 1.05 * best + 1e-4);
    best = std::min(best, losses[i]);
  }
  CHECK(losses.back() < 0.5 * losses.front());
}
