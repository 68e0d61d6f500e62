#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semrte/config.hpp"
#include "semrte/fusion.hpp"

namespace semrte {

// Everything needed to rebuild a model from a checkpoint besides the weights.
struct CheckpointMeta {
  EncoderConfig encoder;
  FusionConfig fusion;
  TrainConfig train;
  int vocab_size = 0;
  int chunk_size = 0;
  std::vector<std::string> label_tags;  // LabelInventory::tags(), id order
  std::vector<std::string> vocab_pieces;
  bool ablate_semantics = false;  // trained on all-O aspects
};

struct Checkpoint {
  CheckpointMeta meta;
  SemanticRteModel<float> model;
};

// File layout (little-endian):
//   "SRTECKPT" u32 version u32 tensor_count
//   per tensor: u32 name_len, name, u32 ndim, u64 dims[ndim], float32 payload (row-major)
//   u64 trailer_len, JSON trailer with the configs and vocabularies
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const std::string& path, const SemanticRteModel<float>& model,
                     const CheckpointMeta& meta);
std::string serialize_checkpoint(const SemanticRteModel<float>& model, const CheckpointMeta& meta);

// Throws DataError on a malformed file, an unknown tensor name or a shape
// that disagrees with the configs in the trailer.
Checkpoint load_checkpoint(const std::string& path);
Checkpoint parse_checkpoint(const std::string& bytes);

}  // namespace semrte
