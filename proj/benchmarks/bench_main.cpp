#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "ldplab/montecarlo.hpp"
#include "ldplab/noise.hpp"
#include "ldplab/solver.hpp"

using namespace ldplab;

namespace {

GridConfig standard_grid() {
  GridConfig g;
  g.dx = 0.05;
  g.dt = 0.002;
  g.r_max = 64;
  g.pad = 8;
  return g;
}

void BM_WhiteSlice(benchmark::State& state) {
  const auto g = standard_grid();
  std::vector<double> out(g.interior_count());
  std::uint32_t step = 0;
  for (auto _ : state) {
    fill_white(g, {1, 0, step++}, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(out.size()));
}
BENCHMARK(BM_WhiteSlice);

void BM_ColoredSlice(benchmark::State& state) {
  const auto g = standard_grid();
  const NoiseSource src(make_kernel_preset("gauss"), g);
  auto ws = src.make_workspace();
  std::vector<double> out(g.interior_count());
  std::uint32_t step = 0;
  for (auto _ : state) {
    src.fill({1, 0, step++}, out, ws);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(out.size()));
}
BENCHMARK(BM_ColoredSlice);

template <OperatorKind Kind>
void BM_Step(benchmark::State& state) {
  auto g = standard_grid();
  if (Kind == OperatorKind::Wave) g.dt = 0.025;
  EquationSpec eq;
  eq.kind = Kind;
  eq.sigma = SigmaFunction::tanh(1.0, 1.0);
  auto s = FieldState::initial(eq, g);
  std::vector<double> xi(g.interior_count());
  fill_white(g, {1, 0, 0}, xi);
  for (double& v : xi) v *= 1e-3;
  for (auto _ : state) {
    if constexpr (Kind == OperatorKind::Heat) {
      step_heat(s, xi, eq, g);
    } else {
      step_wave(s, xi, eq, g);
    }
    benchmark::DoNotOptimize(s.current.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(xi.size()));
}
BENCHMARK(BM_Step<OperatorKind::Heat>);
BENCHMARK(BM_Step<OperatorKind::Wave>);

void BM_LogMeanExp(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> d(0.0, 5.0);
  std::vector<double> x(static_cast<std::size_t>(state.range(0)));
  for (auto& v : x) v = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(log_mean_exp(x));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LogMeanExp)->Arg(1 << 10)->Arg(1 << 14);

}  // namespace
BENCHMARK_MAIN();
