#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "fedsim/aggregation.hpp"
#include "fedsim/attacks.hpp"
#include "fedsim/data.hpp"
#include "fedsim/fedreview.hpp"
#include "fedsim/mlp.hpp"

namespace {

using namespace fedsim;

std::vector<ParamVector> updates(std::size_t n, std::size_t d) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<ParamVector> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(d);
    for (double& x : v) x = g(rng) + 0.1;
    out.emplace_back(std::move(v));
  }
  return out;
}

// Default architecture: 32 -> 64 -> 10.
constexpr std::size_t kParams = 32 * 64 + 64 + 64 * 10 + 10;

void BM_MultiKrum(benchmark::State& state) {
  const auto u = updates(static_cast<std::size_t>(state.range(0)), kParams);
  for (auto _ : state) benchmark::DoNotOptimize(multi_krum(u, 2));
}
BENCHMARK(BM_MultiKrum)->Arg(10)->Arg(20)->Arg(50);

void BM_TrimmedMean(benchmark::State& state) {
  const auto u = updates(static_cast<std::size_t>(state.range(0)), kParams);
  for (auto _ : state) benchmark::DoNotOptimize(trimmed_mean(u, 2));
}
BENCHMARK(BM_TrimmedMean)->Arg(10)->Arg(50);

void BM_Median(benchmark::State& state) {
  const auto u = updates(static_cast<std::size_t>(state.range(0)), kParams);
  for (auto _ : state) benchmark::DoNotOptimize(median_agg(u));
}
BENCHMARK(BM_Median)->Arg(10)->Arg(50);

void BM_MinMaxAttack(benchmark::State& state) {
  const auto u = updates(10, kParams);
  AttackConfig cfg;
  cfg.kind = AttackKind::kMinMax;
  for (auto _ : state) benchmark::DoNotOptimize(min_max_attack(u, cfg));
}
BENCHMARK(BM_MinMaxAttack);

void BM_TrainLocal(benchmark::State& state) {
  const auto data = generate_synthetic(10, 48, 32, 5.0, 1);
  const auto model = MlpModel::initialized({32, 64, 10}, Activation::kTanh, 2);
  SgdConfig cfg;
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(train_local(model, data, cfg, ++seed));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size() * cfg.local_epochs));
}
BENCHMARK(BM_TrainLocal)->Unit(benchmark::kMillisecond);

void BM_ReviewLosses(benchmark::State& state) {
  const auto data = generate_synthetic(10, 48, 32, 5.0, 1);
  const auto model = MlpModel::initialized({32, 64, 10}, Activation::kTanh, 2);
  auto u = updates(10, kParams);
  for (auto& v : u) v = ParamVector(std::vector<double>(v.values().begin(), v.values().end()), model.shape());
  ReviewConfig cfg;
  cfg.noniid_mode = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(review_losses(model, u, data, cfg, 3));
}
BENCHMARK(BM_ReviewLosses)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
