#pragma once

#include <cstdint>
#include <string>

namespace semrte {

// Context encoder shape. Defaults are the desk-scale toy encoder.
struct EncoderConfig {
  int d_model = 64;
  int layers = 2;
  int heads = 4;
  int ffn_dim = 256;
  int max_length = 256;
  double dropout = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

struct FusionConfig {
  int label_embed_dim = 16;
  int gru_hidden = 16;  // per direction
  int sem_proj_dim = 32;
  int cnn_kernel_width = 3;
  int num_aspects = 2;  // m
  static constexpr int kNumClasses = 3;

  void validate() const;
  bool operator==(const FusionConfig&) const = default;
};

// Optimizer and schedule. Defaults are the usual multilingual fine-tuning
// settings (lr 2e-5, decay 0.01, batch 12, max length 256, 5 epochs).
struct TrainConfig {
  double learning_rate = 2e-5;
  double weight_decay = 0.01;
  int batch_size = 12;
  int max_length = 256;
  int epochs = 5;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double max_grad_norm = 0.0;  // 0 disables clipping

  // Step size suited to training the toy encoder from scratch.
  static TrainConfig toy();

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

std::string to_json(const EncoderConfig& c);
std::string to_json(const FusionConfig& c);
std::string to_json(const TrainConfig& c);
EncoderConfig encoder_config_from_json(const std::string& text);
FusionConfig fusion_config_from_json(const std::string& text);
TrainConfig train_config_from_json(const std::string& text);

}  // namespace semrte
