#include <benchmark/benchmark.h>

#include <random>

#include "agrifid/attribution.hpp"
#include "agrifid/committee.hpp"
#include "agrifid/consensus.hpp"
#include "agrifid/null_fdr.hpp"
#include "agrifid/synthgen.hpp"

namespace {

using namespace agrifid;

std::vector<BinaryMask> committee(std::size_t k, Shape shape, double density) {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution on(density);
  std::vector<BinaryMask> out;
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<std::uint8_t> bits(shape.size());
    for (auto& b : bits) b = on(rng) ? 1 : 0;
    out.emplace_back(shape, std::move(bits));
  }
  return out;
}

void BM_ObservedConsensus(benchmark::State& state) {
  const auto masks = committee(static_cast<std::size_t>(state.range(0)), {128, 64}, 0.05);
  for (auto _ : state) benchmark::DoNotOptimize(stratify(observed_consensus(masks)));
}
BENCHMARK(BM_ObservedConsensus)->Arg(2)->Arg(4)->Arg(8);

// One sample at the default evaluation size: K=4, 128x64, B permutations.
void BM_EmpiricalFdr(benchmark::State& state) {
  const auto masks = committee(4, {128, 64}, 0.05);
  NullConfig cfg;
  cfg.permutations = static_cast<std::size_t>(state.range(0));
  cfg.threads = static_cast<unsigned>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(empirical_fdr(masks, cfg));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EmpiricalFdr)
    ->Args({100, 1})
    ->Args({1000, 1})
    ->Args({1000, 4})
    ->Unit(benchmark::kMillisecond);

std::vector<LabeledSample> training_set() {
  SynthConfig s;
  s.n_per_class = 10;
  s.spurious_injection = true;
  std::vector<LabeledSample> data;
  for (std::size_t i = 0; i < 2 * s.n_per_class; ++i) {
    const auto label = i < s.n_per_class ? ClassLabel::Healthy : ClassLabel::Unhealthy;
    data.push_back({gen_sample(label, s, i).x.data(), label});
  }
  return data;
}

void BM_IntegratedGradients(benchmark::State& state) {
  const auto data = training_set();
  TrainConfig tc;
  tc.epochs = 5;
  const auto kind = state.range(0) == 0 ? ModelKind::Linear : ModelKind::Mlp;
  const auto model = train(kind, data, tc, "bench").model;
  IgConfig ig;
  ig.steps = static_cast<std::size_t>(state.range(1));
  const auto& x = data.back().x;
  for (auto _ : state) {
    benchmark::DoNotOptimize(integrated_gradients(*model, x, ClassLabel::Unhealthy, ig));
  }
  state.SetLabel(std::string(to_string(kind)));
}
BENCHMARK(BM_IntegratedGradients)
    ->Args({0, 64})
    ->Args({1, 64})
    ->Args({1, 256})
    ->Unit(benchmark::kMillisecond);

void BM_TopFractionMask(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  Matrix m(128, 64);
  for (auto& v : m.values()) v = n(rng);
  const AttributionMap attr(m);
  for (auto _ : state) benchmark::DoNotOptimize(binarize_top_fraction(attr, 0.05));
}
BENCHMARK(BM_TopFractionMask);

}  // namespace
BENCHMARK_MAIN();
