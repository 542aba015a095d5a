#include "hetdyn/arealization.hpp"
#include "hetdyn/equilibrium.hpp"
#include "hetdyn/grid_kernels.hpp"
#include "hetdyn/sl_dynamics.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace hetdyn;

static void BM_ConvolutionApply(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Grid1D g(0.0, 1.0, n);
  const auto conv = build_convolution(g, GaussianKernel(0.05), BoundaryCondition::Reflecting, true);
  Field f(static_cast<Eigen::Index>(n)), out;
  for (std::size_t i = 0; i < n; ++i) f[static_cast<Eigen::Index>(i)] = std::sin(3.0 * g.node(i));
  for (auto _ : state) {
    conv.apply_into(f, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConvolutionApply)->RangeMultiplier(2)->Range(100, 1600)->Complexity();

static void BM_ConvolutionBuild(benchmark::State& state) {
  const Grid1D g(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto conv = build_convolution(g, GaussianKernel(0.05), BoundaryCondition::Reflecting, true);
    benchmark::DoNotOptimize(&conv);
  }
}
BENCHMARK(BM_ConvolutionBuild)->Arg(400)->Arg(800);

static void BM_SL4Rate(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Grid1D g(0.0, 1.0, n);
  SLParams p;
  p.alpha = SpatialGradient::linear(0.2, 0.8);
  p.beta = SpatialGradient::linear(1.5, 0.1);
  p.sigma_F = p.sigma_T = p.sigma_W = 0.02;
  const SL4System sys(g, p);
  const Field s = SLState::uniform(n, {0.4, 0.2, 0.3, 0.1}).stacked();
  Field rate;
  for (auto _ : state) {
    sys.rhs(s, rate);
    benchmark::DoNotOptimize(rate.data());
  }
}
BENCHMARK(BM_SL4Rate)->Arg(200)->Arg(400)->Arg(800);

static void BM_ArealStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  ArealParams p;
  p.use_path = true;
  const Grid1D g(0.0, 40.0, n);
  const ArealStepper stepper(p, g, 0.1);
  Field s = areal_initial_state(p, g, 1e-2, 1);
  for (auto _ : state) {
    stepper.step(s);
    benchmark::DoNotOptimize(s.data());
  }
}
BENCHMARK(BM_ArealStep)->Arg(400)->Arg(1600);

static void BM_TuringGrowth(benchmark::State& state) {
  const ArealParams p;
  HomogeneousEquilibrium eq;
  for (const auto& e : homogeneous_equilibria(0.45, 0.45)) {
    if (e.stable_k0) eq = e;
  }
  for (auto _ : state) {
    auto d = dispersion(eq, p);
    benchmark::DoNotOptimize(d.max_growth);
  }
}
BENCHMARK(BM_TuringGrowth);

static void BM_FindEquilibriaSL4(benchmark::State& state) {
  const SL4ODE m(SLParams{}, [](double x) { return 0.8 + 0.5 * x; },
                 [](double x) { return 0.15 + 0.1 * x; });
  for (auto _ : state) {
    auto eqs = find_equilibria(m, 0.5);
    benchmark::DoNotOptimize(eqs.data());
  }
}
BENCHMARK(BM_FindEquilibriaSL4);
BENCHMARK_MAIN();
