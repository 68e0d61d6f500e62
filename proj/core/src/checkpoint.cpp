#include "semrte/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semrte/common.hpp"

namespace semrte {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'R', 'T', 'E', 'C', 'K', 'P', 'T'};

template <typename U>
void put(std::string& out, U v) {
  char buf[sizeof(U)];
  std::memcpy(buf, &v, sizeof(U));
  out.append(buf, sizeof(U));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename U>
  U get(const char* what) {
    need(sizeof(U), what);
    U v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  std::string take(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  void read_floats(float* dst, std::size_t count, const std::string& name) {
    need(count * sizeof(float), ("payload of " + name).c_str());
    std::memcpy(dst, bytes_.data() + pos_, count * sizeof(float));
    pos_ += count * sizeof(float);
  }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw DataError(std::string("checkpoint truncated while reading ") + what + " at byte " +
                      std::to_string(pos_));
    }
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

std::string trailer_json(const CheckpointMeta& meta) {
  nlohmann::ordered_json j;
  j["encoder"] = nlohmann::ordered_json::parse(to_json(meta.encoder));
  j["fusion"] = nlohmann::ordered_json::parse(to_json(meta.fusion));
  j["train"] = nlohmann::ordered_json::parse(to_json(meta.train));
  j["vocab_size"] = meta.vocab_size;
  j["chunk_size"] = meta.chunk_size;
  j["label_tags"] = meta.label_tags;
  j["vocab_pieces"] = meta.vocab_pieces;
  j["ablate_semantics"] = meta.ablate_semantics;
  return j.dump();
}

CheckpointMeta meta_from_trailer(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    CheckpointMeta meta;
    meta.encoder = encoder_config_from_json(j.at("encoder").dump());
    meta.fusion = fusion_config_from_json(j.at("fusion").dump());
    meta.train = train_config_from_json(j.at("train").dump());
    meta.vocab_size = j.at("vocab_size").get<int>();
    meta.chunk_size = j.at("chunk_size").get<int>();
    meta.label_tags = j.at("label_tags").get<std::vector<std::string>>();
    meta.vocab_pieces = j.at("vocab_pieces").get<std::vector<std::string>>();
    meta.ablate_semantics = j.value("ablate_semantics", false);
    return meta;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint trailer: ") + e.what());
  }
}

}  // namespace

std::string serialize_checkpoint(const SemanticRteModel<float>& model, const CheckpointMeta& meta) {
  const auto params = model.parameters();
  std::string out(kMagic, sizeof kMagic);
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p->name.size()));
    out += p->name;
    put<std::uint32_t>(out, 2);
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.rows()));
    put<std::uint64_t>(out, static_cast<std::uint64_t>(p->value.cols()));
    out.append(reinterpret_cast<const char*>(p->value.data()),
               static_cast<std::size_t>(p->value.size()) * sizeof(float));
  }
  const std::string trailer = trailer_json(meta);
  put<std::uint64_t>(out, trailer.size());
  out += trailer;
  return out;
}

void save_checkpoint(const std::string& path, const SemanticRteModel<float>& model,
                     const CheckpointMeta& meta) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write checkpoint '" + path + "'");
  const std::string bytes = serialize_checkpoint(model, meta);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("failed writing checkpoint '" + path + "'");
}

Checkpoint parse_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.take(sizeof kMagic, "magic") != std::string(kMagic, sizeof kMagic)) {
    throw DataError("not a checkpoint file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = r.get<std::uint32_t>("tensor count");

  struct Raw {
    std::uint64_t rows = 0, cols = 0;
    std::vector<float> data;
  };
  std::map<std::string, Raw> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = r.get<std::uint32_t>("name length");
    std::string name = r.take(name_len, "tensor name");
    const auto ndim = r.get<std::uint32_t>("ndim");
    if (ndim != 2) throw DataError("tensor '" + name + "' has " + std::to_string(ndim) + " dims, expected 2");
    Raw raw;
    raw.rows = r.get<std::uint64_t>("dims");
    raw.cols = r.get<std::uint64_t>("dims");
    if (raw.rows > (1u << 28) || raw.cols > (1u << 28)) throw DataError("tensor '" + name + "' is implausibly large");
    raw.data.resize(raw.rows * raw.cols);
    r.read_floats(raw.data.data(), raw.data.size(), name);
    if (!tensors.emplace(name, std::move(raw)).second) throw DataError("duplicate tensor '" + name + "'");
  }
  const auto trailer_len = r.get<std::uint64_t>("trailer length");
  const std::string trailer = r.take(trailer_len, "trailer");
  if (!r.at_end()) throw DataError("trailing bytes after checkpoint trailer");

  Checkpoint ck;
  ck.meta = meta_from_trailer(trailer);
  try {
    ck.meta.encoder.validate();
    ck.meta.fusion.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  }
  ck.model = SemanticRteModel<float>(ck.meta.encoder, ck.meta.fusion, ck.meta.vocab_size,
                                     static_cast<int>(ck.meta.label_tags.size()));
  auto params = ck.model.parameters();
  if (params.size() != tensors.size()) {
    throw DataError("checkpoint holds " + std::to_string(tensors.size()) + " tensors, model expects " +
                    std::to_string(params.size()));
  }
  for (auto* p : params) {
    auto it = tensors.find(p->name);
    if (it == tensors.end()) throw DataError("checkpoint is missing tensor '" + p->name + "'");
    const Raw& raw = it->second;
    if (raw.rows != static_cast<std::uint64_t>(p->value.rows()) ||
        raw.cols != static_cast<std::uint64_t>(p->value.cols())) {
      throw DataError("tensor '" + p->name + "' has shape " + std::to_string(raw.rows) + "x" +
                      std::to_string(raw.cols) + ", config implies " + std::to_string(p->value.rows()) +
                      "x" + std::to_string(p->value.cols()));
    }
    std::memcpy(p->value.data(), raw.data.data(), raw.data.size() * sizeof(float));
  }
  return ck;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_checkpoint(ss.str());
}

}  // namespace semrte
