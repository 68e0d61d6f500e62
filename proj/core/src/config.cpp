#include "semrte/config.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

#include "semrte/common.hpp"

namespace semrte {

using nlohmann::json;

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

json parse_object(const std::string& text) {
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw DataError("config JSON must be an object");
    return j;
  } catch (const json::parse_error& e) {
    throw DataError(std::string("malformed config JSON: ") + e.what());
  }
}

template <typename V>
void read(const json& j, const char* key, V& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<V>();
}

}  // namespace

void EncoderConfig::validate() const {
  require(d_model > 0 && layers > 0 && heads > 0 && ffn_dim > 0 && max_length > 0,
          "encoder dimensions must be positive");
  require(d_model % heads == 0, "d_model must be divisible by heads");
  require(dropout >= 0.0 && dropout < 1.0, "dropout must lie in [0, 1)");
}

void FusionConfig::validate() const {
  require(label_embed_dim > 0 && gru_hidden > 0 && sem_proj_dim > 0 && cnn_kernel_width > 0,
          "fusion dimensions must be positive");
  require(num_aspects >= 1 && num_aspects <= 5, "num_aspects must lie in [1, 5]");
}

TrainConfig TrainConfig::toy() {
  TrainConfig c;
  c.learning_rate = 1e-4;
  return c;
}

void TrainConfig::validate() const {
  require(learning_rate >= 0.0, "learning_rate must be non-negative");
  require(epochs >= 1, "epochs must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(max_length > 0, "max_length must be positive");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, "betas must lie in [0, 1)");
  require(epsilon > 0.0, "epsilon must be positive");
  require(weight_decay >= 0.0, "weight_decay must be non-negative");
  require(max_grad_norm >= 0.0, "max_grad_norm must be non-negative");
}

std::string to_json(const EncoderConfig& c) {
  nlohmann::ordered_json j;
  j["d_model"] = c.d_model;
  j["layers"] = c.layers;
  j["heads"] = c.heads;
  j["ffn_dim"] = c.ffn_dim;
  j["max_length"] = c.max_length;
  j["dropout"] = c.dropout;
  j["seed"] = c.seed;
  return j.dump();
}

std::string to_json(const FusionConfig& c) {
  nlohmann::ordered_json j;
  j["label_embed_dim"] = c.label_embed_dim;
  j["gru_hidden"] = c.gru_hidden;
  j["sem_proj_dim"] = c.sem_proj_dim;
  j["cnn_kernel_width"] = c.cnn_kernel_width;
  j["num_aspects"] = c.num_aspects;
  j["num_classes"] = FusionConfig::kNumClasses;
  return j.dump();
}

std::string to_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["learning_rate"] = c.learning_rate;
  j["weight_decay"] = c.weight_decay;
  j["batch_size"] = c.batch_size;
  j["max_length"] = c.max_length;
  j["epochs"] = c.epochs;
  j["seed"] = c.seed;
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["epsilon"] = c.epsilon;
  j["max_grad_norm"] = c.max_grad_norm;
  return j.dump();
}

EncoderConfig encoder_config_from_json(const std::string& text) {
  const json j = parse_object(text);
  EncoderConfig c;
  read(j, "d_model", c.d_model);
  read(j, "layers", c.layers);
  read(j, "heads", c.heads);
  read(j, "ffn_dim", c.ffn_dim);
  read(j, "max_length", c.max_length);
  read(j, "dropout", c.dropout);
  read(j, "seed", c.seed);
  return c;
}

FusionConfig fusion_config_from_json(const std::string& text) {
  const json j = parse_object(text);
  FusionConfig c;
  read(j, "label_embed_dim", c.label_embed_dim);
  read(j, "gru_hidden", c.gru_hidden);
  read(j, "sem_proj_dim", c.sem_proj_dim);
  read(j, "cnn_kernel_width", c.cnn_kernel_width);
  read(j, "num_aspects", c.num_aspects);
  return c;
}

TrainConfig train_config_from_json(const std::string& text) {
  const json j = parse_object(text);
  TrainConfig c;
  read(j, "learning_rate", c.learning_rate);
  read(j, "weight_decay", c.weight_decay);
  read(j, "batch_size", c.batch_size);
  read(j, "max_length", c.max_length);
  read(j, "epochs", c.epochs);
  read(j, "seed", c.seed);
  read(j, "beta1", c.beta1);
  read(j, "beta2", c.beta2);
  read(j, "epsilon", c.epsilon);
  read(j, "max_grad_norm", c.max_grad_norm);
  return c;
}

}  // namespace semrte
