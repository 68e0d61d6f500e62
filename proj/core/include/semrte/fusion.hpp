#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "semrte/aspects.hpp"
#include "semrte/autograd.hpp"
#include "semrte/config.hpp"
#include "semrte/encoder.hpp"
#include "semrte/tokenizer.hpp"

namespace semrte {

// The model's input contract for one pair.
struct EncodedExample {
  std::string id;
  std::vector<int> subword_ids;
  std::vector<WordSpan> word_spans;
  // m rows, each word_spans.size() wide, of label ids.
  std::vector<std::vector<int>> aspect_ids;
  int gold = 0;
  Lang lang = Lang::kVie;
  int predicates1 = 0;  // count_predicates of the capped text1 aspects
  int predicates2 = 0;
};
using EncodedBatch = std::vector<EncodedExample>;

// Tokenizes the pair, lays out its capped aspect sets on the same word grid
// and maps tags to ids. Aspect sets are capped/padded to m here.
EncodedExample encode_example(const PremisePair& pair, const AspectSet& aspects1,
                              const AspectSet& aspects2, const SubwordVocab& vocab,
                              const LabelInventory& inventory, int m, int max_length);

// ---------------------------------------------------------------------------
// Parameters of the fusion head.

template <typename T>
struct AlignmentParams {
  Parameter<T> kernel;  // [width * d_model x d_model]; tap j is rows j*d .. j*d+d-1
  Parameter<T> bias;    // [1 x d_model]
  int width = 3;
};

// Cho et al. gating; column blocks of the weights are [reset | update | candidate].
//   r = sigmoid(x Wr + h Ur + br)     z = sigmoid(x Wz + h Uz + bz)
//   n = tanh(x Wn + (r * h) Un + bn)  h' = (1 - z) * n + z * h
template <typename T>
struct GruParams {
  Parameter<T> w_input;   // [input x 3H]
  Parameter<T> w_hidden;  // [H x 3H]
  Parameter<T> bias;      // [1 x 3H]
};

template <typename T>
struct SemanticEncoderParams {
  Parameter<T> label_embedding;  // [num_tags x label_embed_dim]
  GruParams<T> forward;
  GruParams<T> backward;
  Parameter<T> proj_weight;  // [m * 2H x sem_proj_dim]
  Parameter<T> proj_bias;
  int num_aspects = 2;
};

template <typename T>
struct ClassifierParams {
  Parameter<T> weight;  // [(d_model + sem_proj_dim) x 3]
  Parameter<T> bias;
};

// ---------------------------------------------------------------------------
// Graph-building components.

// Per word: zero-padded same-length 1-D convolution over the word's subword
// vectors, then an elementwise max over positions. Returns [words x d].
template <typename T>
ag::Var align_words(ag::Tape<T>& tape, ag::Var subwords, std::span<const WordSpan> spans,
                    const AlignmentParams<T>& params);

// Runs a GRU over per-step inputs ([batch x input] each) from a zero state.
// With reverse set the scan goes right-to-left; outputs stay indexed by
// position either way.
template <typename T>
std::vector<ag::Var> run_gru(ag::Tape<T>& tape, std::span<const ag::Var> steps,
                             const GruParams<T>& params, bool reverse);

// aspect_ids: m rows of label ids over the same words. Each row is embedded
// and run through the bidirectional GRU; per word the m outputs of width 2H
// are concatenated and projected. Returns [words x sem_proj_dim].
template <typename T>
ag::Var encode_semantics(ag::Tape<T>& tape, const std::vector<std::vector<int>>& aspect_ids,
                         const SemanticEncoderParams<T>& params);

struct JointRepresentation {
  ag::Var fused;  // [words x (d_model + sem_proj_dim)]
  ag::Var h;      // row 0 (the CLS position)
};

template <typename T>
JointRepresentation fuse(ag::Tape<T>& tape, ag::Var word_context, ag::Var word_semantics);

template <typename T>
ag::Var classifier_logits(ag::Tape<T>& tape, ag::Var h, const ClassifierParams<T>& params);

// Value-level classification: softmax(h W + b) over {agree, disagree, neutral}.
template <typename T>
std::array<T, 3> classify(const Matrix<T>& h, const ClassifierParams<T>& params);

template <typename T>
std::array<T, 3> softmax3(const Matrix<T>& logits);

// ---------------------------------------------------------------------------

// Context encoder + alignment + semantic encoder + classifier.
template <typename T>
class SemanticRteModel {
 public:
  SemanticRteModel() = default;
  SemanticRteModel(const EncoderConfig& encoder_config, const FusionConfig& fusion_config,
                   int vocab_size, int num_tags);

  // Builds the graph for one example and returns its [1 x 3] logits.
  ag::Var logits(ag::Tape<T>& tape, const EncodedExample& example,
                 const ForwardMode& mode = {}) const;

  // Class probabilities per example.
  std::vector<std::array<T, 3>> forward(std::span<const EncodedExample> batch) const;

  const FusionConfig& fusion_config() const { return fusion_config_; }
  const EncoderConfig& encoder_config() const { return encoder.config(); }
  int num_tags() const { return static_cast<int>(semantics.label_embedding.value.rows()); }

  std::vector<Parameter<T>*> parameters();
  std::vector<const Parameter<T>*> parameters() const;

  ContextEncoder<T> encoder;
  AlignmentParams<T> alignment;
  SemanticEncoderParams<T> semantics;
  ClassifierParams<T> classifier;

 private:
  FusionConfig fusion_config_;
};

}  // namespace semrte
