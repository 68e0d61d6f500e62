#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "semrte/experiment.hpp"
#include "semrte/fixtures.hpp"
#include "semrte/fusion.hpp"
#include "semrte/rng.hpp"

using namespace semrte;
using Mat = Matrix<double>;

namespace {

Mat random_mat(Rng& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  return m;
}

GruParams<double> random_gru(Rng& rng, int in, int hidden) {
  return {{"wi", "gru", random_mat(rng, in, 3 * hidden, 0.7), true},
          {"wh", "gru", random_mat(rng, hidden, 3 * hidden, 0.7), true},
          {"b", "gru", random_mat(rng, 1, 3 * hidden, 0.3), false}};
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct Micro {
  Fixture fx;
  AspectIndex index;
  SubwordVocab vocab;
  LabelInventory inventory;
};

Micro micro_data(std::size_t n, std::uint64_t seed) {
  Micro d;
  d.fx = generate_fixture(FixtureKind::kAspectSignal, {n, 0, 0}, seed);
  d.index = index_aspects(d.fx.aspects);
  d.vocab = vocab_of(d.fx.train, 3);
  d.inventory = inventory_of(d.fx.aspects);
  return d;
}

}  // namespace

TEST_CASE("align_words with an identity kernel") {
  const int d = 4;
  AlignmentParams<double> p;
  p.width = 3;
  p.kernel = {"k", "cnn_alignment", Mat::Zero(3 * d, d), true};
  p.kernel.value.middleRows(d, d) = Mat::Identity(d, d);
  p.bias = {"b", "cnn_alignment", Mat::Zero(1, d), false};

  Rng rng(1);
  Mat x = random_mat(rng, 6, d);
  x.row(3) = x.row(2);
  x.row(4) = x.row(2);
  ag::Tape<double> t;
  const std::vector<WordSpan> spans{{0, 0}, {1, 1}, {2, 4}, {5, 5}};
  const Mat out = t.value(align_words(t, t.constant(x), spans, p));
  CHECK(out.row(0) == x.row(0));
  CHECK(out.row(1) == x.row(1));
  CHECK(out.row(2) == x.row(2));  // identical vectors: the max is that vector
  CHECK(out.row(3) == x.row(5));

  const std::vector<WordSpan> empty{{2, 1}};
  CHECK_THROWS_AS(align_words(t, t.constant(x), empty, p), std::invalid_argument);
}

TEST_CASE("align_words matches a looped convolution and max") {
  Rng rng(2);
  for (int width : {1, 3, 5}) {
    const int d = 5;
    AlignmentParams<double> p;
    p.width = width;
    p.kernel = {"k", "cnn_alignment", random_mat(rng, width * d, d), true};
    p.bias = {"b", "cnn_alignment", random_mat(rng, 1, d), false};
    const Mat x = random_mat(rng, 9, d);
    const std::vector<WordSpan> spans{{0, 0}, {1, 3}, {4, 5}, {6, 8}};
    ag::Tape<double> t;
    const Mat out = t.value(align_words(t, t.constant(x), spans, p));
    const int off = (width - 1) / 2;
    for (std::size_t w = 0; w < spans.size(); ++w) {
      const int len = spans[w].last - spans[w].first + 1;
      for (int c = 0; c < d; ++c) {
        double best = -1e300;
        for (int pos = 0; pos < len; ++pos) {
          double acc = p.bias.value(0, c);
          for (int j = 0; j < width; ++j) {
            const int src = pos + j - off;
            if (src < 0 || src >= len) continue;
            for (int k = 0; k < d; ++k) acc += x(spans[w].first + src, k) * p.kernel.value(j * d + k, c);
          }
          best = std::max(best, acc);
        }
        CHECK(out(static_cast<Eigen::Index>(w), c) == doctest::Approx(best).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("one GRU step follows the gate equations") {
  Rng rng(3);
  const int in = 3, H = 2;
  const auto g = random_gru(rng, in, H);
  const Mat x = random_mat(rng, 1, in);
  ag::Tape<double> t;
  const std::vector<ag::Var> steps{t.constant(x)};
  const Mat h = t.value(run_gru(t, steps, g, false)[0]);
  for (int j = 0; j < H; ++j) {
    auto pre = [&](int block) {
      double s = g.bias.value(0, block * H + j);
      for (int k = 0; k < in; ++k) s += x(0, k) * g.w_input.value(k, block * H + j);
      return s;
    };
    // Zero initial state: the recurrent terms vanish.
    const double z = sigmoid(pre(1));
    const double n = std::tanh(pre(2));
    CHECK(h(0, j) == doctest::Approx((1 - z) * n).epsilon(1e-14));
  }
}

TEST_CASE("two GRU steps with a nonzero state") {
  Rng rng(4);
  const int in = 2, H = 3;
  const auto g = random_gru(rng, in, H);
  const Mat x0 = random_mat(rng, 1, in), x1 = random_mat(rng, 1, in);
  ag::Tape<double> t;
  const std::vector<ag::Var> steps{t.constant(x0), t.constant(x1)};
  const auto outs = run_gru(t, steps, g, false);
  const Mat h0 = t.value(outs[0]);
  const Mat h1 = t.value(outs[1]);
  const Mat& Wi = g.w_input.value;
  const Mat& Wh = g.w_hidden.value;
  const Mat& b = g.bias.value;
  for (int j = 0; j < H; ++j) {
    double xr = b(0, j), xz = b(0, H + j), xn = b(0, 2 * H + j);
    for (int k = 0; k < in; ++k) {
      xr += x1(0, k) * Wi(k, j);
      xz += x1(0, k) * Wi(k, H + j);
      xn += x1(0, k) * Wi(k, 2 * H + j);
    }
    double hr = 0, hz = 0;
    for (int k = 0; k < H; ++k) {
      hr += h0(0, k) * Wh(k, j);
      hz += h0(0, k) * Wh(k, H + j);
    }
    const double r = sigmoid(xr + hr), z = sigmoid(xz + hz);
    // The reset gate scales the state per input channel of U_n.
    std::vector<double> r_all(H);
    for (int k = 0; k < H; ++k) {
      double a = b(0, k), c = 0;
      for (int q = 0; q < in; ++q) a += x1(0, q) * Wi(q, k);
      for (int q = 0; q < H; ++q) c += h0(0, q) * Wh(q, k);
      r_all[static_cast<std::size_t>(k)] = sigmoid(a + c);
    }
    double hn = 0;
    for (int k = 0; k < H; ++k) hn += r_all[static_cast<std::size_t>(k)] * h0(0, k) * Wh(k, 2 * H + j);
    const double n = std::tanh(xn + hn);
    CHECK(r == doctest::Approx(r_all[static_cast<std::size_t>(j)]));
    CHECK(h1(0, j) == doctest::Approx((1 - z) * n + z * h0(0, j)).epsilon(1e-13));
  }
}

TEST_CASE("GRU direction symmetry") {
  Rng rng(5);
  const int E = 3, H = 2, words = 6, tags = 5;
  SemanticEncoderParams<double> p;
  p.num_aspects = 1;
  p.label_embedding = {"emb", "label_embeddings", random_mat(rng, tags, E), true};
  p.forward = random_gru(rng, E, H);
  p.backward = random_gru(rng, E, H);
  p.proj_weight = {"pw", "projection", Mat::Identity(2 * H, 2 * H), true};
  p.proj_bias = {"pb", "projection", Mat::Zero(1, 2 * H), false};

  std::vector<std::vector<int>> ids{{1, 4, 0, 2, 3, 1}};
  std::vector<std::vector<int>> rev{ids[0]};
  std::reverse(rev[0].begin(), rev[0].end());

  // A single-direction scan over reversed input reads as the reverse scan.
  std::vector<ag::Var> steps, rsteps;
  ag::Tape<double> t;
  const ag::Var table = t.param(p.label_embedding);
  for (int i = 0; i < words; ++i) {
    steps.push_back(ag::gather_rows<double>(t, table, std::span<const int>(&ids[0][static_cast<std::size_t>(i)], 1)));
    rsteps.push_back(ag::gather_rows<double>(t, table, std::span<const int>(&rev[0][static_cast<std::size_t>(i)], 1)));
  }
  const auto a = run_gru(t, steps, p.forward, false);
  const auto b = run_gru(t, rsteps, p.forward, true);
  for (int i = 0; i < words; ++i) CHECK(t.value(a[static_cast<std::size_t>(i)]) == t.value(b[static_cast<std::size_t>(words - 1 - i)]));

  // Bidirectional: swap the directions and reverse the words.
  SemanticEncoderParams<double> swapped = p;
  std::swap(swapped.forward, swapped.backward);
  const Mat out = t.value(encode_semantics(t, ids, p));
  const Mat out_rev = t.value(encode_semantics(t, rev, swapped));
  for (int i = 0; i < words; ++i) {
    CHECK(out.row(i).head(H) == out_rev.row(words - 1 - i).tail(H));
    CHECK(out.row(i).tail(H) == out_rev.row(words - 1 - i).head(H));
  }
}

TEST_CASE("zero GRU weights give the projection bias") {
  Rng rng(6);
  const int E = 3, H = 2, P = 4, m = 2;
  SemanticEncoderParams<double> p;
  p.num_aspects = m;
  p.label_embedding = {"emb", "label_embeddings", random_mat(rng, 3, E), true};
  for (auto* g : {&p.forward, &p.backward}) {
    *g = {{"wi", "gru", Mat::Zero(E, 3 * H), true}, {"wh", "gru", Mat::Zero(H, 3 * H), true},
          {"b", "gru", Mat::Zero(1, 3 * H), false}};
  }
  p.proj_weight = {"pw", "projection", random_mat(rng, m * 2 * H, P), true};
  p.proj_bias = {"pb", "projection", random_mat(rng, 1, P), false};
  ag::Tape<double> t;
  const std::vector<std::vector<int>> all_o{{0, 0, 0, 0}, {0, 0, 0, 0}};
  const Mat out = t.value(encode_semantics(t, all_o, p));
  for (int i = 0; i < 4; ++i) CHECK(out.row(i) == p.proj_bias.value);

  const std::vector<std::vector<int>> one_row{{0, 0, 0, 0}};
  CHECK_THROWS_AS(encode_semantics(t, one_row, p), std::invalid_argument);
}

TEST_CASE("fuse and classify") {
  Rng rng(7);
  ag::Tape<double> t;
  const Mat ctx = random_mat(rng, 5, 64), sem = Mat::Zero(5, 32);
  const auto joint = fuse<double>(t, t.constant(ctx), t.constant(sem));
  const Mat& f = t.value(joint.fused);
  CHECK(f.cols() == 96);
  CHECK(f.leftCols(64) == ctx);
  CHECK(f.rightCols(32).isZero(0.0));
  CHECK(t.value(joint.h) == f.row(0));
  CHECK_THROWS_AS(fuse<double>(t, t.constant(ctx), t.constant(Mat::Zero(4, 32))), std::invalid_argument);

  ClassifierParams<double> zero{{"w", "classifier", Mat::Zero(96, 3), true}, {"b", "classifier", Mat::Zero(1, 3), false}};
  for (double p : classify<double>(f.row(0), zero)) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  ClassifierParams<double> c{{"w", "classifier", random_mat(rng, 96, 3, 0.1), true},
                             {"b", "classifier", random_mat(rng, 1, 3), false}};
  for (int trial = 0; trial < 200; ++trial) {
    const Mat h = random_mat(rng, 1, 96);
    const auto probs = classify<double>(h, c);
    long double z[3], sum = 0;
    for (int k = 0; k < 3; ++k) {
      long double s = c.bias.value(0, k);
      for (int i = 0; i < 96; ++i) s += (long double)h(0, i) * c.weight.value(i, k);
      z[k] = std::exp(s);
      sum += z[k];
    }
    double total = 0;
    for (int k = 0; k < 3; ++k) {
      CHECK(std::abs(probs[static_cast<std::size_t>(k)] - static_cast<double>(z[k] / sum)) < 1e-9);
      total += probs[static_cast<std::size_t>(k)];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-15));

    // A constant added to every logit changes nothing.
    auto shifted = c;
    shifted.bias.value.array() += 3.75;
    const auto sp = classify<double>(h, shifted);
    for (int k = 0; k < 3; ++k) CHECK(sp[static_cast<std::size_t>(k)] == doctest::Approx(probs[static_cast<std::size_t>(k)]).epsilon(1e-12));
    const auto arg = [](const std::array<double, 3>& p) { return std::max_element(p.begin(), p.end()) - p.begin(); };
    CHECK(arg(sp) == arg(probs));
  }
}

TEST_CASE("forward equals the component composition") {
  const auto d = micro_data(4, 1);
  const auto ex = encode_pairs(d.fx.train, d.index, d.vocab, d.inventory, 2, 64);
  EncoderConfig e;
  e.d_model = 16;
  e.layers = 1;
  e.heads = 2;
  e.ffn_dim = 32;
  e.max_length = 64;
  FusionConfig f;
  SemanticRteModel<double> model(e, f, d.vocab.size(), static_cast<int>(d.inventory.size()));

  const auto probs = model.forward(ex);
  for (std::size_t i = 0; i < ex.size(); ++i) {
    ag::Tape<double> t;
    const auto sub = model.encoder.encode(t, ex[i].subword_ids, static_cast<int>(ex[i].subword_ids.size()));
    const auto words = align_words(t, sub, ex[i].word_spans, model.alignment);
    const auto sem = encode_semantics(t, ex[i].aspect_ids, model.semantics);
    const auto joint = fuse<double>(t, words, sem);
    CHECK(classify<double>(t.value(joint.h), model.classifier) == probs[i]);
  }
  const std::vector<EncodedExample> dup{ex[1], ex[1], ex[0]};
  const auto dp = model.forward(dup);
  CHECK(dp[0] == probs[1]);
  CHECK(dp[1] == probs[1]);
  CHECK(dp[2] == probs[0]);

  auto bad = ex[0];
  bad.aspect_ids.pop_back();
  ag::Tape<double> t;
  CHECK_THROWS_AS(model.logits(t, bad), DataError);
  bad = ex[0];
  bad.aspect_ids[0][0] = static_cast<int>(d.inventory.size());
  CHECK_THROWS_AS(model.logits(t, bad), DataError);
}

TEST_CASE("aspects beyond m never reach the model") {
  auto d = micro_data(3, 2);
  const int m = 2;
  AspectIndex extended;
  for (auto& [id, set] : d.index) {
    set = cap_and_pad(set, m);
    auto longer = set;
    for (int k = 0; k < 3; ++k) longer.aspects.push_back(std::vector<std::string>(set.tokens.size(), "B-ARG1"));
    extended.emplace(id, longer);
  }
  const auto a = encode_pairs(d.fx.train, d.index, d.vocab, d.inventory, m, 64);
  const auto b = encode_pairs(d.fx.train, extended, d.vocab, d.inventory, m, 64);
  EncoderConfig e;
  e.d_model = 8;
  e.layers = 1;
  e.heads = 1;
  e.ffn_dim = 8;
  e.max_length = 64;
  SemanticRteModel<float> model(e, FusionConfig{}, d.vocab.size(), static_cast<int>(d.inventory.size()));
  CHECK(model.forward(a) == model.forward(b));
}

TEST_CASE("permuting label ids with the embedding rows changes nothing") {
  const auto d = micro_data(4, 3);
  const auto ex = encode_pairs(d.fx.train, d.index, d.vocab, d.inventory, 2, 64);
  EncoderConfig e;
  e.d_model = 8;
  e.layers = 1;
  e.heads = 2;
  e.ffn_dim = 8;
  e.max_length = 64;
  SemanticRteModel<float> model(e, FusionConfig{}, d.vocab.size(), static_cast<int>(d.inventory.size()));
  const int tags = model.num_tags();
  std::vector<int> perm(static_cast<std::size_t>(tags));
  for (int i = 0; i < tags; ++i) perm[static_cast<std::size_t>(i)] = i;
  Rng rng(4);
  rng.shuffle(perm);
  auto permuted_model = model;
  auto permuted_ex = ex;
  for (int i = 0; i < tags; ++i) {
    permuted_model.semantics.label_embedding.value.row(perm[static_cast<std::size_t>(i)]) =
        model.semantics.label_embedding.value.row(i);
  }
  for (auto& x : permuted_ex) {
    for (auto& row : x.aspect_ids) {
      for (auto& id : row) id = perm[static_cast<std::size_t>(id)];
    }
  }
  CHECK(model.forward(ex) == permuted_model.forward(permuted_ex));
}

TEST_CASE("outputs stay finite at the default configuration") {
  const auto d = micro_data(40, 4);
  auto ex = encode_pairs(d.fx.train, d.index, d.vocab, d.inventory, 2, 256);
  EncoderConfig e;
  e.seed = 9;
  SemanticRteModel<float> model(e, FusionConfig{}, d.vocab.size(), static_cast<int>(d.inventory.size()));
  Rng rng(10);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    EncodedExample x = ex[rng.uniform_index(ex.size())];
    for (std::size_t i = 1; i + 1 < x.subword_ids.size(); ++i) {
      if (rng.uniform_index(4) == 0) x.subword_ids[i] = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(d.vocab.size())));
    }
    for (auto& row : x.aspect_ids) {
      for (auto& id : row) id = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(model.num_tags())));
    }
    const std::vector<EncodedExample> one{x};
    for (float p : model.forward(one)[0]) CHECK(std::isfinite(p));
    ++checked;
  }
  CHECK(checked == 1000);
}
