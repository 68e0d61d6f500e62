#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "semrte/aspects.hpp"
#include "semrte/checkpoint.hpp"
#include "semrte/config.hpp"
#include "semrte/evaluator.hpp"
#include "semrte/fusion.hpp"
#include "semrte/tokenizer.hpp"
#include "semrte/trainer.hpp"

namespace semrte {

using AspectIndex = std::map<std::string, AspectSet>;

// Keyed by sentence id; throws DataError on a duplicate id.
AspectIndex index_aspects(std::span<const AspectSet> sets);

// Encodes every pair with its two aspect sets (looked up by
// text1_sentence_id / text2_sentence_id; a missing set is a DataError).
// With `ablate` set the aspects are replaced by all-O rows first.
std::vector<EncodedExample> encode_pairs(std::span<const PremisePair> pairs, const AspectIndex& aspects,
                                         const SubwordVocab& vocab, const LabelInventory& inventory, int m,
                                         int max_length, bool ablate = false);

// Role inventory over every aspect row; V is always included.
LabelInventory inventory_of(std::span<const AspectSet> sets);
SubwordVocab vocab_of(std::span<const PremisePair> pairs, int chunk_size);

struct ExperimentConfig {
  EncoderConfig encoder;
  FusionConfig fusion;
  TrainConfig train = TrainConfig::toy();
  int chunk_size = 3;
  bool ablate_semantics = false;
};

struct ExperimentResult {
  SemanticRteModel<float> model;
  CheckpointMeta meta;
  TrainLog log;
  std::vector<Prediction> test_predictions;
};

// Builds vocab and inventory from the training data, initializes a model
// seeded with train.seed + kInit, trains on `train` (selecting on `val`)
// and predicts `test`. encoder.max_length is taken from train.max_length.
ExperimentResult run_experiment(std::span<const PremisePair> train, std::span<const PremisePair> val,
                                std::span<const PremisePair> test, const AspectIndex& aspects,
                                const ExperimentConfig& cfg, const TrainOptions& options = {});

}  // namespace semrte
