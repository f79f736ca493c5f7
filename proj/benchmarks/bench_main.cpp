#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "semipso/metrics.hpp"
#include "semipso/ops.hpp"
#include "semipso/pso.hpp"
#include "semipso/synthetic.hpp"
#include "semipso/trainer.hpp"

using namespace semipso;

namespace {

template <Real T>
Tensor4<T> random_tensor(Shape4 s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  Tensor4<T> t(s);
  for (auto& v : t.data()) v = static_cast<T>(u(rng));
  return t;
}

template <Real T>
void BM_Conv2dForward(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  const auto x = random_tensor<T>(Shape4{2, 8, size, size}, 1);
  const auto k = random_tensor<T>(Shape4{16, 8, 3, 3}, 2);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_forward(x, k, ConvGeometry{1, 1}));
  state.SetItemsProcessed(state.iterations() * 2 * 16 * size * size);
}
BENCHMARK(BM_Conv2dForward<float>)->Arg(16)->Arg(32)->Arg(64);
BENCHMARK(BM_Conv2dForward<double>)->Arg(32);

void BM_PsoSphere(benchmark::State& state) {
  PsoConfig cfg;
  cfg.lower.assign(3, -5);
  cfg.upper.assign(3, 5);
  cfg.population = 10;
  cfg.generations = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const auto r = pso_optimize(
        [](std::span<const double> x) { return -(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]); }, cfg);
    benchmark::DoNotOptimize(r.best_fitness);
    ++cfg.seed;
  }
}
BENCHMARK(BM_PsoSphere)->Arg(10)->Arg(100);

void BM_RocPrAuc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = u(rng);
    y[i] = u(rng) < 0.12 ? 1 : 0;
  }
  for (auto _ : state) benchmark::DoNotOptimize(make_report(s, y));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_RocPrAuc)->Arg(1024)->Arg(32 * 32 * 10)->Arg(512 * 512);

void BM_TrainStep(benchmark::State& state) {
  SyntheticConfig syn;
  syn.count = 20;
  syn.image_size = 32;
  TrainConfig cfg;
  cfg.segmenter.base_channels = static_cast<int>(state.range(0));
  const Dataset data = split_labeled(generate_synthetic(syn), 0.1, 0);
  Trainer<float> trainer(cfg, data);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step());
}
BENCHMARK(BM_TrainStep)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
