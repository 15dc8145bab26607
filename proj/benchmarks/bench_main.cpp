#include <benchmark/benchmark.h>

#include "logext/chain_model.hpp"
#include "logext/diffusion.hpp"
#include "logext/exact_solver.hpp"
#include "logext/rng.hpp"
#include "logext/simulator.hpp"

using namespace logext;

namespace {

void BM_ExactSolve(benchmark::State& state) {
  const auto params = make_params(state.range(0), 1.5);
  for (auto _ : state) {
    auto res = exact::solve(params);
    benchmark::DoNotOptimize(res.log_E_star_o);
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExactSolve)->RangeMultiplier(10)->Range(100, 1'000'000)->Complexity(benchmark::oN);

void BM_HittingProbs(benchmark::State& state) {
  const auto params = make_params(state.range(0), 1.5);
  const exact::LogNuTable table(params);
  for (auto _ : state) {
    auto h = exact::hitting_probs(table);
    benchmark::DoNotOptimize(h.h_minus.data());
  }
}
BENCHMARK(BM_HittingProbs)->Arg(1000)->Arg(100000);

// Events per second of the bare event loop, subcritical chain run to extinction.
void BM_SimulationEvents(benchmark::State& state) {
  const auto params = make_params(state.range(0), 0.9);
  const auto table = sim::JumpTable::from_spec(BDRateSpec::logistic(params));
  std::uint64_t events = 0, stream = 0;
  for (auto _ : state) {
    RngStream rng(1, stream++);
    const auto out = sim::run_to_absorption(table, params.n / 2, rng, sim::kDefaultTCap);
    events += out.events;
    benchmark::DoNotOptimize(out.time);
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_SimulationEvents)->Arg(1000)->Arg(100000);

void BM_BbpEvents(benchmark::State& state) {
  const auto table = sim::JumpTable::from_spec(BDRateSpec::bbp(1.0));
  std::uint64_t events = 0, stream = 0;
  for (auto _ : state) {
    RngStream rng(2, stream++);
    const auto out = sim::run_to_absorption(table, 3, rng, 1e3);
    events += out.events;
    benchmark::DoNotOptimize(out.time);
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_BbpEvents);

// Euler-Maruyama steps per second at the critical default dt.
void BM_DiffusionSteps(benchmark::State& state) {
  const auto spec = diffusion::DiffusionSpec::critical(0.0, 1.0);
  double steps = 0.0;
  std::uint64_t stream = 0;
  for (auto _ : state) {
    RngStream rng(3, stream++);
    const auto hit = diffusion::simulate_hitting_time(spec, rng);
    steps += hit.time / spec.dt;
    benchmark::DoNotOptimize(hit.time);
  }
  state.counters["steps/s"] = benchmark::Counter(steps, benchmark::Counter::kIsRate);
}
BENCHMARK(BM_DiffusionSteps);

void BM_CoupledRun(benchmark::State& state) {
  const auto params = make_params(50, 1.2);
  const std::vector<std::int64_t> initial{5, 25, 50};
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto paths = sim::simulate_coupled(params, initial, seed++);
    benchmark::DoNotOptimize(paths.data());
  }
}
BENCHMARK(BM_CoupledRun);

}  // namespace

BENCHMARK_MAIN();
