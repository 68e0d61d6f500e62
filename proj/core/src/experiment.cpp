#include "semrte/experiment.hpp"

#include <set>

#include "semrte/rng.hpp"

namespace semrte {

AspectIndex index_aspects(std::span<const AspectSet> sets) {
  AspectIndex index;
  for (const auto& s : sets) {
    if (!index.emplace(s.sentence_id, s).second) throw DataError("duplicate aspect set for '" + s.sentence_id + "'");
  }
  return index;
}

namespace {

const AspectSet& lookup(const AspectIndex& aspects, const std::string& id) {
  auto it = aspects.find(id);
  if (it == aspects.end()) throw DataError("no aspect set for sentence '" + id + "'");
  return it->second;
}

}  // namespace

std::vector<EncodedExample> encode_pairs(std::span<const PremisePair> pairs, const AspectIndex& aspects,
                                         const SubwordVocab& vocab, const LabelInventory& inventory, int m,
                                         int max_length, bool ablate) {
  std::vector<EncodedExample> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    AspectSet a1 = lookup(aspects, text1_sentence_id(p));
    AspectSet a2 = lookup(aspects, text2_sentence_id(p));
    if (ablate) {
      a1.aspects.clear();
      a2.aspects.clear();
    }
    out.push_back(encode_example(p, a1, a2, vocab, inventory, m, max_length));
  }
  return out;
}

LabelInventory inventory_of(std::span<const AspectSet> sets) {
  std::set<std::string> roles{"V"};
  for (const auto& s : sets) {
    for (const auto& row : s.aspects) {
      for (const auto& tag : row) {
        const IobTag t = parse_iob_tag(tag);
        if (t.kind != IobTag::Kind::kOutside) roles.insert(t.role);
      }
    }
  }
  return LabelInventory(std::vector<std::string>(roles.begin(), roles.end()));
}

SubwordVocab vocab_of(std::span<const PremisePair> pairs, int chunk_size) {
  std::vector<std::vector<std::string>> texts;
  texts.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    texts.push_back(p.text1);
    texts.push_back(p.text2);
  }
  return SubwordVocab::build(texts, chunk_size);
}

ExperimentResult run_experiment(std::span<const PremisePair> train, std::span<const PremisePair> val,
                                std::span<const PremisePair> test, const AspectIndex& aspects,
                                const ExperimentConfig& cfg, const TrainOptions& options) {
  const SubwordVocab vocab = vocab_of(train, cfg.chunk_size);
  std::vector<AspectSet> sets;
  for (const auto& [id, s] : aspects) sets.push_back(s);
  const LabelInventory inventory = inventory_of(sets);

  EncoderConfig enc = cfg.encoder;
  enc.max_length = cfg.train.max_length;
  enc.seed = cfg.train.seed + seed_offset::kInit;
  const int m = cfg.fusion.num_aspects;
  const int len = cfg.train.max_length;

  const auto train_ex = encode_pairs(train, aspects, vocab, inventory, m, len, cfg.ablate_semantics);
  const auto val_ex = encode_pairs(val, aspects, vocab, inventory, m, len, cfg.ablate_semantics);
  const auto test_ex = encode_pairs(test, aspects, vocab, inventory, m, len, cfg.ablate_semantics);

  ExperimentResult result;
  result.model = SemanticRteModel<float>(enc, cfg.fusion, vocab.size(), static_cast<int>(inventory.size()));
  result.meta.encoder = enc;
  result.meta.fusion = cfg.fusion;
  result.meta.train = cfg.train;
  result.meta.vocab_size = vocab.size();
  result.meta.chunk_size = vocab.chunk_size();
  result.meta.label_tags = inventory.tags();
  result.meta.vocab_pieces = vocab.pieces();
  result.meta.ablate_semantics = cfg.ablate_semantics;

  TrainOptions opts = options;
  opts.meta = result.meta;
  result.log = semrte::train(result.model, train_ex, val_ex, cfg.train, opts);
  if (!test_ex.empty()) result.test_predictions = predict(result.model, test_ex);
  return result;
}

}  // namespace semrte
