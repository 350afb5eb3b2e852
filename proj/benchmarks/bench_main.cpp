#include <benchmark/benchmark.h>

#include <random>

#include "nsim/goal.hpp"
#include "nsim/report.hpp"
#include "nsim/simengine.hpp"

namespace {

using namespace nsim;

void BM_SimulateDissemination(benchmark::State& state) {
  const auto s = goal::gen_dissemination(static_cast<goal::Rank>(state.range(0)), 16);
  const sim::CompiledSchedule cs(s);
  sim::SimConfig cfg;
  cfg.params = {2000, 300, 300, 0.08};
  for (auto _ : state) benchmark::DoNotOptimize(sim::simulate(cs, cfg).completion);
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cs.op_count()));
}
BENCHMARK(BM_SimulateDissemination)->RangeMultiplier(8)->Range(16, 16384);

void BM_SimulateRingWithLatencyNoise(benchmark::State& state) {
  const auto s = goal::gen_ring_allreduce(static_cast<goal::Rank>(state.range(0)), 1 << 20, 100);
  const sim::CompiledSchedule cs(s);
  sim::SimConfig cfg;
  cfg.params = {2000, 300, 300, 0.08};
  cfg.noise.latency = EmpiricalDistribution({1190, 1200, 1250, 1400, 11900}, Unit::nanoseconds);
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(sim::simulate(cs, cfg).completion);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cs.op_count()));
}
BENCHMARK(BM_SimulateRingWithLatencyNoise)->Arg(16)->Arg(128);

void BM_ParseGoal(benchmark::State& state) {
  const auto text = goal::emit_goal(goal::gen_ring_allreduce(static_cast<goal::Rank>(state.range(0)), 1 << 20, 10));
  for (auto _ : state) benchmark::DoNotOptimize(goal::parse_goal(text).nranks);
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_ParseGoal)->Arg(16)->Arg(256);

void BM_BoxStats(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> d(7.0, 0.5);
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = d(rng);
  for (auto _ : state) benchmark::DoNotOptimize(report::box_stats(v).median);
}
BENCHMARK(BM_BoxStats)->Arg(1000)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
