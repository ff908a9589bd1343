#include <benchmark/benchmark.h>

#include "drm/bspline.hpp"
#include "drm/energy.hpp"
#include "drm/network.hpp"
#include "drm/pde.hpp"

using namespace drm;

namespace {

Network member(int d, int depth, int width) {
  FunctionClassSpec spec;
  spec.depth = depth;
  spec.width = width;
  return random_init(spec, d, 0);
}

void BM_Forward(benchmark::State& state) {
  const Network net = member(2, 3, static_cast<int>(state.range(0)));
  const PointSet x = sample_interior(4096, 2, 0);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
  state.SetItemsProcessed(state.iterations() * x.cols());
}
BENCHMARK(BM_Forward)->Arg(8)->Arg(16)->Arg(64);

void BM_EnergyAndGradient(benchmark::State& state) {
  const PdeProblem p = make_problem("sine-1d", 100.0);
  const Network net = member(1, 3, 16);
  const auto n = static_cast<std::size_t>(state.range(0));
  const EnergyBatch batch = EnergyBatch::make(sample_batch(n, n, 1, 0), p);
  for (auto _ : state) benchmark::DoNotOptimize(energy_value_and_gradient(net, batch, p.lambda));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_EnergyAndGradient)->Arg(256)->Arg(1024)->Arg(4096);

void BM_DerivativeNetwork(benchmark::State& state) {
  const Network net = member(3, 4, 16);
  for (auto _ : state) benchmark::DoNotOptimize(build_gradnorm_network(net));
}
BENCHMARK(BM_DerivativeNetwork);

void BM_SplineCompile(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  const DyadicSplineIndex idx{3, std::vector<int>(static_cast<std::size_t>(d), 1)};
  for (auto _ : state) benchmark::DoNotOptimize(compile_to_network(idx));
}
BENCHMARK(BM_SplineCompile)->DenseRange(1, 4);

}  // namespace

BENCHMARK_MAIN();
