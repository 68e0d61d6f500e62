#include "semrte/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "semrte/common.hpp"
#include "semrte/rng.hpp"

namespace semrte {

EncodedExample encode_example(const PremisePair& pair, const AspectSet& aspects1,
                              const AspectSet& aspects2, const SubwordVocab& vocab,
                              const LabelInventory& inventory, int m, int max_length) {
  const TokenizedInput tok = tokenize_pair(pair, vocab, max_length);
  const AspectSet capped1 = cap_and_pad(aspects1, m);
  const AspectSet capped2 = cap_and_pad(aspects2, m);
  const PairAspectGrid grid = pair_aspects(pair, capped1, capped2, m, tok.kept1, tok.kept2);
  if (grid.width != tok.word_spans.size()) {
    throw std::logic_error("aspect grid width " + std::to_string(grid.width) +
                           " differs from word count " + std::to_string(tok.word_spans.size()));
  }
  EncodedExample ex;
  ex.id = pair.id;
  ex.subword_ids = tok.subword_ids;
  ex.word_spans = tok.word_spans;
  for (const auto& row : grid.rows) {
    std::vector<int> ids;
    ids.reserve(row.size());
    for (const auto& tag : row) ids.push_back(inventory.id_of(tag));
    ex.aspect_ids.push_back(std::move(ids));
  }
  ex.gold = label_index(pair.label);
  ex.lang = pair.lang;
  ex.predicates1 = count_predicates(capped1);
  ex.predicates2 = count_predicates(capped2);
  return ex;
}

// ---------------------------------------------------------------------------
// Alignment

template <typename T>
ag::Var align_words(ag::Tape<T>& tape, ag::Var subwords, std::span<const WordSpan> spans,
                    const AlignmentParams<T>& params) {
  const auto& X = tape.value(subwords);
  const auto& K = params.kernel.value;
  const auto& B = params.bias.value;
  const Eigen::Index d = X.cols();
  const int width = params.width;
  const int offset = (width - 1) / 2;
  if (K.rows() != width * d || K.cols() != d || B.cols() != d) {
    throw std::invalid_argument("align_words: kernel shape does not match d_model");
  }
  const auto n_words = static_cast<Eigen::Index>(spans.size());
  Matrix<T> out(n_words, d);
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> argmax(n_words, d);

  for (Eigen::Index w = 0; w < n_words; ++w) {
    const WordSpan s = spans[static_cast<std::size_t>(w)];
    if (s.first > s.last) throw std::invalid_argument("align_words: empty word span");
    if (s.first < 0 || s.last >= X.rows()) throw std::out_of_range("align_words: span outside input");
    const int len = s.last - s.first + 1;
    Matrix<T> conv = B.replicate(len, 1);
    for (int j = 0; j < width; ++j) {
      const int shift = j - offset;
      const int t0 = std::max(0, -shift);
      const int t1 = std::min(len, len - shift);  // exclusive
      if (t1 <= t0) continue;
      conv.middleRows(t0, t1 - t0).noalias() +=
          X.middleRows(s.first + t0 + shift, t1 - t0) * K.middleRows(j * d, d);
    }
    for (Eigen::Index c = 0; c < d; ++c) {
      Eigen::Index best = 0;
      out(w, c) = conv.col(c).maxCoeff(&best);
      argmax(w, c) = static_cast<int>(best);
    }
  }

  const ag::Var kernel = tape.param(params.kernel);
  const ag::Var bias = tape.param(params.bias);
  std::vector<WordSpan> kept(spans.begin(), spans.end());
  return tape.push(
      std::move(out), {subwords, kernel, bias},
      [subwords, kernel, bias, kept = std::move(kept), argmax = std::move(argmax), width, offset](
          ag::Tape<T>& tp, ag::Var self) {
        const auto& G = tp.grad(self);
        const auto& Xv = tp.value(subwords);
        const auto& Kv = tp.value(kernel);
        const Eigen::Index dd = Xv.cols();
        const bool need_x = tp.requires_grad(subwords);
        auto& dK = tp.grad(kernel);
        tp.grad(bias) += G.colwise().sum();
        for (std::size_t w = 0; w < kept.size(); ++w) {
          const WordSpan s = kept[w];
          const int len = s.last - s.first + 1;
          const auto wi = static_cast<Eigen::Index>(w);
          Matrix<T> dconv = Matrix<T>::Zero(len, dd);
          for (Eigen::Index c = 0; c < dd; ++c) dconv(argmax(wi, c), c) = G(wi, c);
          for (int j = 0; j < width; ++j) {
            const int shift = j - offset;
            const int t0 = std::max(0, -shift);
            const int t1 = std::min(len, len - shift);
            if (t1 <= t0) continue;
            const auto xs = Xv.middleRows(s.first + t0 + shift, t1 - t0);
            const auto gs = dconv.middleRows(t0, t1 - t0);
            dK.middleRows(j * dd, dd).noalias() += xs.transpose() * gs;
            if (need_x) {
              tp.grad(subwords).middleRows(s.first + t0 + shift, t1 - t0).noalias() +=
                  gs * Kv.middleRows(j * dd, dd).transpose();
            }
          }
        }
      });
}

// ---------------------------------------------------------------------------
// Semantic encoder

template <typename T>
std::vector<ag::Var> run_gru(ag::Tape<T>& tape, std::span<const ag::Var> steps,
                             const GruParams<T>& params, bool reverse) {
  const auto H = static_cast<int>(params.w_hidden.value.rows());
  std::vector<ag::Var> outputs(steps.size());
  if (steps.empty()) return outputs;
  const auto batch = tape.value(steps[0]).rows();

  const ag::Var w_in = tape.param(params.w_input);
  const ag::Var bias = tape.param(params.bias);
  const ag::Var w_h = tape.param(params.w_hidden);
  const ag::Var u_rz = ag::slice_cols(tape, w_h, 0, 2 * H);
  const ag::Var u_n = ag::slice_cols(tape, w_h, 2 * H, H);

  ag::Var h = tape.constant(Matrix<T>::Zero(batch, H));
  const auto n = static_cast<std::ptrdiff_t>(steps.size());
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    const auto t = static_cast<std::size_t>(reverse ? n - 1 - k : k);
    const ag::Var xw = ag::add_row(tape, ag::matmul(tape, steps[t], w_in), bias);
    const ag::Var rz = ag::sigmoid(
        tape, ag::add(tape, ag::slice_cols(tape, xw, 0, 2 * H), ag::matmul(tape, h, u_rz)));
    const ag::Var r = ag::slice_cols(tape, rz, 0, H);
    const ag::Var z = ag::slice_cols(tape, rz, H, H);
    const ag::Var cand = ag::tanh(
        tape, ag::add(tape, ag::slice_cols(tape, xw, 2 * H, H),
                      ag::matmul(tape, ag::mul(tape, r, h), u_n)));
    h = ag::add(tape, ag::mul(tape, ag::one_minus(tape, z), cand), ag::mul(tape, z, h));
    outputs[t] = h;
  }
  return outputs;
}

template <typename T>
ag::Var encode_semantics(ag::Tape<T>& tape, const std::vector<std::vector<int>>& aspect_ids,
                         const SemanticEncoderParams<T>& params) {
  const int m = static_cast<int>(aspect_ids.size());
  const auto H = params.forward.w_hidden.value.rows();
  if (m != params.num_aspects || params.proj_weight.value.rows() != 2 * H * m) {
    throw std::invalid_argument("encode_semantics: grid has " + std::to_string(m) +
                                " aspect rows but the parameters expect " +
                                std::to_string(params.num_aspects));
  }
  const std::size_t words = aspect_ids[0].size();
  for (const auto& row : aspect_ids) {
    if (row.size() != words) throw std::invalid_argument("encode_semantics: ragged aspect grid");
  }
  const ag::Var table = tape.param(params.label_embedding);
  std::vector<ag::Var> steps(words);
  std::vector<int> column(static_cast<std::size_t>(m));
  for (std::size_t t = 0; t < words; ++t) {
    for (int i = 0; i < m; ++i) column[static_cast<std::size_t>(i)] = aspect_ids[static_cast<std::size_t>(i)][t];
    steps[t] = ag::gather_rows(tape, table, column);
  }
  const auto fwd = run_gru(tape, steps, params.forward, false);
  const auto bwd = run_gru(tape, steps, params.backward, true);
  std::vector<ag::Var> rows(words);
  for (std::size_t t = 0; t < words; ++t) {
    const ag::Var both[] = {fwd[t], bwd[t]};
    rows[t] = ag::flatten(tape, ag::concat_cols<T>(tape, both));  // aspect-major [1 x m*2H]
  }
  const ag::Var stacked = ag::concat_rows<T>(tape, rows);
  return ag::add_row(tape, ag::matmul(tape, stacked, tape.param(params.proj_weight)),
                     tape.param(params.proj_bias));
}

// ---------------------------------------------------------------------------
// Integration and classification

template <typename T>
JointRepresentation fuse(ag::Tape<T>& tape, ag::Var word_context, ag::Var word_semantics) {
  if (tape.value(word_context).rows() != tape.value(word_semantics).rows()) {
    throw std::invalid_argument("fuse: context and semantics cover different word counts");
  }
  const ag::Var parts[] = {word_context, word_semantics};
  const ag::Var fused = ag::concat_cols<T>(tape, parts);
  return {fused, ag::slice_rows(tape, fused, 0, 1)};
}

template <typename T>
ag::Var classifier_logits(ag::Tape<T>& tape, ag::Var h, const ClassifierParams<T>& params) {
  return ag::add_row(tape, ag::matmul(tape, h, tape.param(params.weight)), tape.param(params.bias));
}

template <typename T>
std::array<T, 3> softmax3(const Matrix<T>& logits) {
  const T mx = logits.maxCoeff();
  std::array<T, 3> p{};
  T sum = 0;
  for (int c = 0; c < 3; ++c) {
    p[static_cast<std::size_t>(c)] = std::exp(logits(0, c) - mx);
    sum += p[static_cast<std::size_t>(c)];
  }
  for (auto& v : p) v /= sum;
  return p;
}

template <typename T>
std::array<T, 3> classify(const Matrix<T>& h, const ClassifierParams<T>& params) {
  if (h.rows() != 1 || h.cols() != params.weight.value.rows()) {
    throw std::invalid_argument("classify: h width does not match the classifier");
  }
  Matrix<T> logits = h * params.weight.value + params.bias.value;
  return softmax3<T>(logits);
}

// ---------------------------------------------------------------------------
// Model

template <typename T>
SemanticRteModel<T>::SemanticRteModel(const EncoderConfig& encoder_config,
                                      const FusionConfig& fusion_config, int vocab_size,
                                      int num_tags)
    : fusion_config_(fusion_config) {
  fusion_config.validate();
  if (vocab_size < 1 || num_tags < 1) throw std::invalid_argument("vocab and tag sets must be non-empty");
  Rng rng(encoder_config.seed);
  encoder = ContextEncoder<T>(encoder_config, vocab_size, rng);
  const int d = encoder_config.d_model;
  const int E = fusion_config.label_embed_dim;
  const int H = fusion_config.gru_hidden;
  const int P = fusion_config.sem_proj_dim;
  const int m = fusion_config.num_aspects;
  auto w = [&](std::string name, std::string group, Eigen::Index r, Eigen::Index c) {
    return Parameter<T>{std::move(name), std::move(group), init_normal<T>(r, c, rng), true};
  };
  auto zero = [](std::string name, std::string group, Eigen::Index c) {
    return Parameter<T>{std::move(name), std::move(group), Matrix<T>::Zero(1, c), false};
  };
  alignment.width = fusion_config.cnn_kernel_width;
  alignment.kernel = w("align.kernel", "cnn_alignment", static_cast<Eigen::Index>(alignment.width) * d, d);
  alignment.bias = zero("align.bias", "cnn_alignment", d);

  semantics.num_aspects = m;
  semantics.label_embedding = w("semantic.label_embedding", "label_embeddings", num_tags, E);
  for (auto* dir : {&semantics.forward, &semantics.backward}) {
    const std::string p = dir == &semantics.forward ? "semantic.gru_fwd." : "semantic.gru_bwd.";
    dir->w_input = w(p + "w_input", "gru", E, 3 * H);
    dir->w_hidden = w(p + "w_hidden", "gru", H, 3 * H);
    dir->bias = zero(p + "bias", "gru", 3 * H);
  }
  semantics.proj_weight = w("semantic.proj_weight", "projection", static_cast<Eigen::Index>(m) * 2 * H, P);
  semantics.proj_bias = zero("semantic.proj_bias", "projection", P);

  classifier.weight = w("classifier.weight", "classifier", d + P, FusionConfig::kNumClasses);
  classifier.bias = zero("classifier.bias", "classifier", FusionConfig::kNumClasses);
}

template <typename T>
ag::Var SemanticRteModel<T>::logits(ag::Tape<T>& tape, const EncodedExample& example,
                                    const ForwardMode& mode) const {
  if (example.aspect_ids.size() != static_cast<std::size_t>(fusion_config_.num_aspects)) {
    throw DataError("example '" + example.id + "' has " + std::to_string(example.aspect_ids.size()) +
                    " aspect rows but the model expects " + std::to_string(fusion_config_.num_aspects));
  }
  for (const auto& row : example.aspect_ids) {
    if (row.size() != example.word_spans.size()) {
      throw DataError("example '" + example.id + "' aspect grid width differs from its word count");
    }
    for (int id : row) {
      if (id < 0 || id >= num_tags()) {
        throw DataError("example '" + example.id + "' has label id " + std::to_string(id) +
                        " outside the inventory");
      }
    }
  }
  const int len = static_cast<int>(example.subword_ids.size());
  const ag::Var sub = encoder.encode(tape, example.subword_ids, len, mode);
  const ag::Var words = align_words(tape, sub, example.word_spans, alignment);
  const ag::Var sem = encode_semantics(tape, example.aspect_ids, semantics);
  const JointRepresentation joint = fuse<T>(tape, words, sem);
  return classifier_logits(tape, joint.h, classifier);
}

template <typename T>
std::vector<std::array<T, 3>> SemanticRteModel<T>::forward(std::span<const EncodedExample> batch) const {
  std::vector<std::array<T, 3>> out;
  out.reserve(batch.size());
  for (const auto& ex : batch) {
    ag::Tape<T> tape;
    out.push_back(softmax3<T>(tape.value(logits(tape, ex))));
  }
  return out;
}

template <typename T>
std::vector<Parameter<T>*> SemanticRteModel<T>::parameters() {
  std::vector<Parameter<T>*> ps;
  encoder.visit_parameters([&](Parameter<T>& p) { ps.push_back(&p); });
  for (auto* p : {&alignment.kernel, &alignment.bias, &semantics.label_embedding,
                  &semantics.forward.w_input, &semantics.forward.w_hidden, &semantics.forward.bias,
                  &semantics.backward.w_input, &semantics.backward.w_hidden, &semantics.backward.bias,
                  &semantics.proj_weight, &semantics.proj_bias, &classifier.weight, &classifier.bias}) {
    ps.push_back(p);
  }
  return ps;
}

template <typename T>
std::vector<const Parameter<T>*> SemanticRteModel<T>::parameters() const {
  auto mutable_ps = const_cast<SemanticRteModel<T>*>(this)->parameters();
  return {mutable_ps.begin(), mutable_ps.end()};
}

#define SEMRTE_INSTANTIATE_FUSION(T)                                                              \
  template ag::Var align_words<T>(ag::Tape<T>&, ag::Var, std::span<const WordSpan>,             \
                                  const AlignmentParams<T>&);                                   \
  template std::vector<ag::Var> run_gru<T>(ag::Tape<T>&, std::span<const ag::Var>,              \
                                           const GruParams<T>&, bool);                          \
  template ag::Var encode_semantics<T>(ag::Tape<T>&, const std::vector<std::vector<int>>&,      \
                                       const SemanticEncoderParams<T>&);                        \
  template JointRepresentation fuse<T>(ag::Tape<T>&, ag::Var, ag::Var);                         \
  template ag::Var classifier_logits<T>(ag::Tape<T>&, ag::Var, const ClassifierParams<T>&);     \
  template std::array<T, 3> classify<T>(const Matrix<T>&, const ClassifierParams<T>&);          \
  template std::array<T, 3> softmax3<T>(const Matrix<T>&);                                      \
  template class SemanticRteModel<T>;

SEMRTE_INSTANTIATE_FUSION(float)
SEMRTE_INSTANTIATE_FUSION(double)

}  // namespace semrte
