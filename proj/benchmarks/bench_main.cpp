#include <benchmark/benchmark.h>

#include "semrte/experiment.hpp"
#include "semrte/fixtures.hpp"
#include "semrte/srl_metrics.hpp"
#include "semrte/trainer.hpp"

using namespace semrte;

namespace {

struct Setup {
  Fixture fx;
  std::vector<EncodedExample> examples;
  SemanticRteModel<float> model;
};

// Toy-size model over a batch of aspect-signal pairs.
const Setup& setup() {
  static const Setup s = [] {
    Setup out;
    out.fx = generate_fixture(FixtureKind::kAspectSignal, {12, 0, 0}, 1);
    const auto vocab = vocab_of(out.fx.train, 3);
    const auto inventory = inventory_of(out.fx.aspects);
    out.examples = encode_pairs(out.fx.train, index_aspects(out.fx.aspects), vocab, inventory, 2, 256);
    out.model = SemanticRteModel<float>(EncoderConfig{}, FusionConfig{}, vocab.size(), static_cast<int>(inventory.size()));
    return out;
  }();
  return s;
}

void BM_Forward(benchmark::State& state) {
  const auto& s = setup();
  for (auto _ : state) benchmark::DoNotOptimize(s.model.forward(s.examples));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.examples.size()));
}
BENCHMARK(BM_Forward)->Unit(benchmark::kMillisecond);

void BM_ForwardBackward(benchmark::State& state) {
  const auto& s = setup();
  for (auto _ : state) benchmark::DoNotOptimize(batch_gradients(s.model, s.examples));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.examples.size()));
}
BENCHMARK(BM_ForwardBackward)->Unit(benchmark::kMillisecond);

void BM_MergeAspects(benchmark::State& state) {
  const auto fx = generate_fixture(FixtureKind::kAspectSignal, {static_cast<std::size_t>(state.range(0)), 0, 0}, 2);
  std::vector<PredictedSequence> seqs;
  for (std::size_t k = 0; k < fx.model_outputs.size(); ++k) {
    const auto part = predictions_from_conll(fx.model_outputs[k], static_cast<int>(k));
    seqs.insert(seqs.end(), part.begin(), part.end());
  }
  for (auto _ : state) benchmark::DoNotOptimize(merge_aspects(seqs, fx.sentences, 2));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seqs.size()));
}
BENCHMARK(BM_MergeAspects)->Arg(100)->Arg(1000);

void BM_SpanPrf(benchmark::State& state) {
  const auto fx = generate_fixture(FixtureKind::kAspectSignal, {1000, 0, 0}, 3);
  std::vector<std::vector<Span>> gold, pred;
  for (std::size_t i = 0; i < fx.model_outputs[0].size() && i < fx.model_outputs[1].size(); ++i) {
    gold.push_back(extract_spans(fx.model_outputs[0][i].labels));
    pred.push_back(extract_spans(fx.model_outputs[1][i].labels));
  }
  for (auto _ : state) benchmark::DoNotOptimize(span_prf(gold, pred));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gold.size()));
}
BENCHMARK(BM_SpanPrf);

}  // namespace
BENCHMARK_MAIN();
