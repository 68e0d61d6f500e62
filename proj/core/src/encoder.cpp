#include "semrte/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "semrte/common.hpp"
#include "semrte/rng.hpp"

namespace semrte {

template <typename T>
Matrix<T> init_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng, double stddev) {
  Matrix<T> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(rng.truncated_normal(stddev));
  return m;
}

namespace {

template <typename T>
Parameter<T> weight(std::string name, std::string group, Eigen::Index rows, Eigen::Index cols,
                    Rng& rng) {
  return {std::move(name), std::move(group), init_normal<T>(rows, cols, rng), true};
}

template <typename T>
Parameter<T> filled(std::string name, std::string group, Eigen::Index cols, T value) {
  return {std::move(name), std::move(group), Matrix<T>::Constant(1, cols, value), false};
}

}  // namespace

template <typename T>
ContextEncoder<T>::ContextEncoder(const EncoderConfig& config, int vocab_size, Rng& rng)
    : config_(config) {
  config.validate();
  const int d = config.d_model;
  token_embedding = weight<T>("encoder.token_embedding", "embeddings", vocab_size, d, rng);
  position_embedding =
      weight<T>("encoder.position_embedding", "embeddings", config.max_length, d, rng);
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = "encoder.layer" + std::to_string(l) + ".";
    EncoderBlock<T> b;
    b.ln1_gain = filled<T>(p + "attn_norm.gain", "attention", d, T(1));
    b.ln1_bias = filled<T>(p + "attn_norm.bias", "attention", d, T(0));
    b.wq = weight<T>(p + "attn.wq", "attention", d, d, rng);
    b.bq = filled<T>(p + "attn.bq", "attention", d, T(0));
    b.wk = weight<T>(p + "attn.wk", "attention", d, d, rng);
    b.bk = filled<T>(p + "attn.bk", "attention", d, T(0));
    b.wv = weight<T>(p + "attn.wv", "attention", d, d, rng);
    b.bv = filled<T>(p + "attn.bv", "attention", d, T(0));
    b.wo = weight<T>(p + "attn.wo", "attention", d, d, rng);
    b.bo = filled<T>(p + "attn.bo", "attention", d, T(0));
    b.ln2_gain = filled<T>(p + "ffn_norm.gain", "ffn", d, T(1));
    b.ln2_bias = filled<T>(p + "ffn_norm.bias", "ffn", d, T(0));
    b.w1 = weight<T>(p + "ffn.w1", "ffn", d, config.ffn_dim, rng);
    b.b1 = filled<T>(p + "ffn.b1", "ffn", config.ffn_dim, T(0));
    b.w2 = weight<T>(p + "ffn.w2", "ffn", config.ffn_dim, d, rng);
    b.b2 = filled<T>(p + "ffn.b2", "ffn", d, T(0));
    blocks.push_back(std::move(b));
  }
}

template <typename T>
ag::Var self_attention(ag::Tape<T>& tape, ag::Var x, const EncoderBlock<T>& block, int heads,
                       int valid_length) {
  const int d = static_cast<int>(tape.value(x).cols());
  const int dh = d / heads;
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dh));
  auto project = [&](const Parameter<T>& w, const Parameter<T>& b) {
    return ag::add_row(tape, ag::matmul(tape, x, tape.param(w)), tape.param(b));
  };
  const ag::Var q = project(block.wq, block.bq);
  const ag::Var k = project(block.wk, block.bk);
  const ag::Var v = project(block.wv, block.bv);
  std::vector<ag::Var> head_out;
  head_out.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    const ag::Var qh = ag::slice_cols(tape, q, h * dh, dh);
    const ag::Var kh = ag::slice_cols(tape, k, h * dh, dh);
    const ag::Var vh = ag::slice_cols(tape, v, h * dh, dh);
    const ag::Var scores = ag::scale(tape, ag::matmul_nt(tape, qh, kh), inv_sqrt);
    const ag::Var probs = ag::masked_softmax(tape, scores, valid_length);
    head_out.push_back(ag::matmul(tape, probs, vh));
  }
  const ag::Var joined = heads == 1 ? head_out[0] : ag::concat_cols<T>(tape, head_out);
  return ag::add_row(tape, ag::matmul(tape, joined, tape.param(block.wo)), tape.param(block.bo));
}

template <typename T>
ag::Var ContextEncoder<T>::encode(ag::Tape<T>& tape, std::span<const int> ids, int valid_length,
                                  const ForwardMode& mode) const {
  const int len = static_cast<int>(ids.size());
  if (len == 0 || valid_length < 1 || valid_length > len) {
    throw std::invalid_argument("encode: valid_length must lie in [1, len]");
  }
  if (len > config_.max_length) {
    throw DataError("sequence of " + std::to_string(len) + " subwords exceeds max_length " +
                    std::to_string(config_.max_length));
  }
  for (int id : ids) {
    if (id < 0 || id >= vocab_size()) {
      throw DataError("subword id " + std::to_string(id) + " outside vocabulary of size " +
                      std::to_string(vocab_size()));
    }
  }
  const bool drop = mode.training && config_.dropout > 0.0;
  if (drop && !mode.rng) throw std::invalid_argument("dropout requires an rng");
  auto maybe_drop = [&](ag::Var v) { return drop ? ag::dropout(tape, v, config_.dropout, *mode.rng) : v; };

  ag::Var x = ag::add(tape, ag::gather_rows(tape, tape.param(token_embedding), ids),
                      ag::slice_rows(tape, tape.param(position_embedding), 0, len));
  x = maybe_drop(x);
  for (const auto& b : blocks) {
    const ag::Var a = ag::layer_norm(tape, x, tape.param(b.ln1_gain), tape.param(b.ln1_bias));
    x = ag::add(tape, x, maybe_drop(self_attention(tape, a, b, config_.heads, valid_length)));
    const ag::Var n = ag::layer_norm(tape, x, tape.param(b.ln2_gain), tape.param(b.ln2_bias));
    ag::Var f = ag::gelu(tape, ag::add_row(tape, ag::matmul(tape, n, tape.param(b.w1)), tape.param(b.b1)));
    f = ag::add_row(tape, ag::matmul(tape, f, tape.param(b.w2)), tape.param(b.b2));
    x = ag::add(tape, x, maybe_drop(f));
  }
  return x;
}

PaddedBatch pad_batch(std::span<const TokenizedInput> inputs) {
  PaddedBatch batch;
  std::size_t width = 0;
  for (const auto& in : inputs) width = std::max(width, in.subword_ids.size());
  for (const auto& in : inputs) {
    std::vector<int> ids = in.subword_ids;
    ids.resize(width, SubwordVocab::kPad);
    batch.ids.push_back(std::move(ids));
    batch.lengths.push_back(static_cast<int>(in.subword_ids.size()));
  }
  return batch;
}

template <typename T>
std::vector<Matrix<T>> encode_batch(const ContextEncoder<T>& encoder, const PaddedBatch& batch) {
  std::vector<Matrix<T>> out;
  out.reserve(batch.ids.size());
  for (std::size_t i = 0; i < batch.ids.size(); ++i) {
    if (i > 0 && batch.ids[i].size() != batch.ids[0].size()) {
      throw std::invalid_argument("encode_batch: sequences must share a padded length");
    }
    ag::Tape<T> tape;
    const ag::Var v = encoder.encode(tape, batch.ids[i], batch.lengths[i]);
    out.push_back(tape.value(v));
  }
  return out;
}

template class ContextEncoder<float>;
template class ContextEncoder<double>;
template ag::Var self_attention<float>(ag::Tape<float>&, ag::Var, const EncoderBlock<float>&, int, int);
template ag::Var self_attention<double>(ag::Tape<double>&, ag::Var, const EncoderBlock<double>&, int, int);
template std::vector<Matrix<float>> encode_batch<float>(const ContextEncoder<float>&, const PaddedBatch&);
template std::vector<Matrix<double>> encode_batch<double>(const ContextEncoder<double>&, const PaddedBatch&);
template Matrix<float> init_normal<float>(Eigen::Index, Eigen::Index, Rng&, double);
template Matrix<double> init_normal<double>(Eigen::Index, Eigen::Index, Rng&, double);

}  // namespace semrte
