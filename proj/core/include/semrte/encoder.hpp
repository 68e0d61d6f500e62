#pragma once

#include <span>
#include <vector>

#include "semrte/autograd.hpp"
#include "semrte/config.hpp"
#include "semrte/tensor.hpp"
#include "semrte/tokenizer.hpp"

namespace semrte {

class Rng;

// Training-time switches for a forward pass. Inference uses the default.
struct ForwardMode {
  bool training = false;
  Rng* rng = nullptr;  // dropout masks; required when training with dropout
};

// One pre-norm transformer block.
template <typename T>
struct EncoderBlock {
  Parameter<T> ln1_gain, ln1_bias;
  Parameter<T> wq, bq, wk, bk, wv, bv, wo, bo;
  Parameter<T> ln2_gain, ln2_bias;
  Parameter<T> w1, b1, w2, b2;
};

// Small trainable transformer producing subword-level contextual vectors:
// token + learned position embedding, then `layers` blocks of
//   x += Attn(LN(x));  x += FFN(LN(x))
// with PAD keys masked out of attention.
template <typename T>
class ContextEncoder {
 public:
  ContextEncoder() = default;
  ContextEncoder(const EncoderConfig& config, int vocab_size, Rng& rng);

  // ids: one sequence, positions >= valid_length are PAD. Returns
  // [ids.size() x d_model]. Throws DataError on ids outside the vocabulary.
  ag::Var encode(ag::Tape<T>& tape, std::span<const int> ids, int valid_length,
                 const ForwardMode& mode = {}) const;

  const EncoderConfig& config() const { return config_; }
  int vocab_size() const { return static_cast<int>(token_embedding.value.rows()); }

  template <typename Fn>
  void visit_parameters(Fn&& fn) {
    fn(token_embedding);
    fn(position_embedding);
    for (auto& b : blocks) visit_block(b, fn);
  }
  template <typename Fn>
  void visit_parameters(Fn&& fn) const {
    fn(token_embedding);
    fn(position_embedding);
    for (const auto& b : blocks) visit_block(b, fn);
  }

  Parameter<T> token_embedding;
  Parameter<T> position_embedding;
  std::vector<EncoderBlock<T>> blocks;

 private:
  template <typename Block, typename Fn>
  static void visit_block(Block& b, Fn& fn) {
    fn(b.ln1_gain); fn(b.ln1_bias);
    fn(b.wq); fn(b.bq); fn(b.wk); fn(b.bk); fn(b.wv); fn(b.bv); fn(b.wo); fn(b.bo);
    fn(b.ln2_gain); fn(b.ln2_bias);
    fn(b.w1); fn(b.b1); fn(b.w2); fn(b.b2);
  }

  EncoderConfig config_;
};

// Multi-head self-attention over an already-normalized input x [len x d]:
// softmax(q k^T / sqrt(d_head)) v per head, heads concatenated, then the
// output projection. Keys at positions >= valid_length are masked.
template <typename T>
ag::Var self_attention(ag::Tape<T>& tape, ag::Var x, const EncoderBlock<T>& block, int heads,
                       int valid_length);

// Sequences padded with PAD to a common length.
struct PaddedBatch {
  std::vector<std::vector<int>> ids;
  std::vector<int> lengths;
};
PaddedBatch pad_batch(std::span<const TokenizedInput> inputs);

// Batch form of encode: one [len x d_model] matrix per sequence.
template <typename T>
std::vector<Matrix<T>> encode_batch(const ContextEncoder<T>& encoder, const PaddedBatch& batch);

// Draws N(0, 0.02) truncated at two standard deviations.
template <typename T>
Matrix<T> init_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng, double stddev = 0.02);

}  // namespace semrte
