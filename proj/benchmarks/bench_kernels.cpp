// Serial reference kernels against their OpenMP counterparts.
//
//   dlfdp_bench --benchmark_filter=Precision
//
// Set OMP_NUM_THREADS to control the parallel variants.

#include "dlfdp/bench.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

using namespace dlfdp;

namespace {

Dataset design(Index n, Index p) {
  SimConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.seed = 3;
  return gen_replication(cfg, 0).first;
}

void precision(benchmark::State& state, ExecPolicy policy) {
  const Dataset d = design(150, state.range(0));
  PrecisionOptions opts;
  opts.kappa = 1.0;
  opts.policy = policy;
  for (auto _ : state) benchmark::DoNotOptimize(build_precision(d, opts).theta_hat.data());
  state.counters["threads"] = policy == ExecPolicy::serial ? 1 : omp_get_max_threads();
  state.counters["column_fits/s"] =
      benchmark::Counter(static_cast<double>(state.range(0)), benchmark::Counter::kIsIterationInvariantRate);
}

void replications(benchmark::State& state, ExecPolicy policy) {
  ExperimentConfig cfg;
  cfg.sim.p = 100;
  cfg.sim.n = 100;
  cfg.sim.reps = static_cast<int>(state.range(0));
  cfg.rankings = false;
  for (auto _ : state) benchmark::DoNotOptimize(run_replications(cfg, policy).size());
  state.counters["threads"] = policy == ExecPolicy::serial ? 1 : omp_get_max_threads();
}

}  // namespace

BENCHMARK_CAPTURE(precision, serial, ExecPolicy::serial)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(precision, parallel, ExecPolicy::parallel)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(replications, serial, ExecPolicy::serial)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(replications, parallel, ExecPolicy::parallel)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
