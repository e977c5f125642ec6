// Serial reference against the OpenMP engine, plus the lattice DP.
//   ./bench_mc --benchmark_filter=Simulate

#include <benchmark/benchmark.h>

#include "mdlab/mc_engine.hpp"
#include "mdlab/oracle.hpp"

namespace {

using namespace mdlab;

SimulationRequest request(Method m, int workers) {
  SimulationRequest r;
  r.x = 2.0;
  r.n_samples = 4 * kChunkPaths;
  r.seed = 1;
  r.method = m;
  r.workers = workers;
  return r;
}

void BM_SimulateSerial(benchmark::State& state) {
  const SequenceSpec seq(Uniform{1.0}, static_cast<std::uint64_t>(state.range(0)));
  const auto req = request(static_cast<Method>(state.range(1)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(simulate_serial(seq, req));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(req.n_samples) * state.range(0));
}

void BM_SimulateParallel(benchmark::State& state) {
  const SequenceSpec seq(Uniform{1.0}, static_cast<std::uint64_t>(state.range(0)));
  const auto req = request(static_cast<Method>(state.range(1)), 0);
  for (auto _ : state) benchmark::DoNotOptimize(simulate(seq, req));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(req.n_samples) * state.range(0));
}

void BM_LatticeDp(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(lattice_dp(n, 1.5));
}

void engine_args(benchmark::internal::Benchmark* b) {
  for (int method : {static_cast<int>(Method::naive), static_cast<int>(Method::tilted)})
    for (int n : {64, 256}) b->Args({n, method});
  b->ArgNames({"n", "method"})->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_SimulateSerial)->Apply(engine_args);
BENCHMARK(BM_SimulateParallel)->Apply(engine_args);
BENCHMARK(BM_LatticeDp)->Arg(1024)->Arg(4096)->Arg(16384)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
