#include <benchmark/benchmark.h>

#include "lobforge/experiments.hpp"
#include "lobforge/kbe.hpp"
#include "lobforge/monte_carlo.hpp"

using namespace lobforge;

namespace {

KbeProblem modelA_problem(double eps) {
  ModelAParams pa;
  pa.n = 10;
  KbeProblem p;
  p.model = build_modelA(pa);
  p.origin = canonical_origin(1, 1);
  p.terminal = ask_increase_indicator(p.origin);
  p.T = 0.2;
  p.dt = 5e-4;
  p.pruning_eps = eps;
  return p;
}

const ExploredSet& explored_set() {
  static const ExploredSet set = explore(modelA_problem(1e-7));
  return set;
}

void euler_sweep_kernel(benchmark::State& state, Execution exec) {
  const ExploredSet& set = explored_set();
  std::vector<double> w(set.expanded), out;
  for (std::size_t i = 0; i < set.expanded; ++i) w[i] = static_cast<double>(i % 2);
  for (auto _ : state) {
    euler_sweep(set, w, out, 5e-4, 0.0, exec);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["states"] = static_cast<double>(set.expanded);
  state.counters["transitions"] = static_cast<double>(set.successor.size());
}

void jump_series_kernel(benchmark::State& state, Execution exec) {
  const KbeProblem p = modelA_problem(1e-6);
  for (auto _ : state) benchmark::DoNotOptimize(jump_series(p, exec).s.back());
}

void monte_carlo_kernel(benchmark::State& state, Execution exec) {
  const ModelPtr m = build_modelB(default_modelB_params(10));
  McOptions opt;
  opt.reps = 2000;
  opt.seed = 5;
  opt.exec = exec;
  for (auto _ : state) benchmark::DoNotOptimize(horizon_outcomes(*m, canonical_origin(1, 1), 0.2, opt).size());
}

}  // namespace

BENCHMARK_CAPTURE(euler_sweep_kernel, serial, Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(euler_sweep_kernel, openmp, Execution::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(jump_series_kernel, serial, Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(jump_series_kernel, openmp, Execution::Parallel)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(monte_carlo_kernel, serial, Execution::Serial)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(monte_carlo_kernel, openmp, Execution::Parallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
