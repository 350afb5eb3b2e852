#include <gtest/gtest.h>

#include <random>
#include <set>

#include "nsim/error.hpp"
#include "nsim/goal.hpp"
#include "nsim/simengine.hpp"
#include "oracle.hpp"
#include "random_schedule.hpp"

namespace nsim::sim {
namespace {

using goal::Schedule;

goal::Schedule one_message(std::uint64_t size) {
  Schedule s(2);
  s.send(0, 1, size);
  s.recv(1, 0, size);
  return s;
}

SimConfig config(LogGPParams p) {
  SimConfig c;
  c.params = p;
  return c;
}

TEST(Simulate, SingleMessageMatchesClosedForm) {
  const LogGPParams p{5000, 1000, 0, 0.01};
  for (std::uint64_t size : {1ull, 2ull, 1'000'001ull, 3ull << 20}) {
    const auto r = simulate(one_message(size), config(p));
    EXPECT_EQ(r.completion, message_time(p, size)) << size;
    EXPECT_EQ(r.per_rank_completion[0], p.o);
  }
}

TEST(Simulate, PerOpTimingsFollowTheMessagePath) {
  const LogGPParams p{100, 10, 0, 0.5};
  auto c = config(p);
  c.record_per_op = true;
  const auto r = simulate(one_message(5), c);
  ASSERT_TRUE(r.per_op.has_value());
  const auto& ops = *r.per_op;
  EXPECT_EQ(ops[0][0], (OpTiming{0, 10}));
  EXPECT_EQ(ops[1][0], (OpTiming{112, 122}));  // arrival 10 + 100 + 2
  EXPECT_FALSE(simulate(one_message(5), config(p)).per_op.has_value());
}

TEST(Simulate, GapSpacesMessageInjections) {
  const LogGPParams p{1000, 10, 250, 0.0};
  Schedule s(2);
  for (int i = 0; i < 3; ++i) {
    s.send(0, 1, 1);
    s.recv(1, 0, 1);
  }
  auto c = config(p);
  c.record_per_op = true;
  const auto r = simulate(s, c);
  const auto& sender = (*r.per_op)[0];
  EXPECT_EQ(sender[0].start, 0);
  EXPECT_EQ(sender[1].start, 250);
  EXPECT_EQ(sender[2].start, 500);
  EXPECT_EQ(r.completion, 500 + 10 + 1000 + 10);
}

TEST(Simulate, CalcOccupiesTheHost) {
  Schedule s(2);
  s.calc(0, 500);
  s.send(0, 1, 1);
  s.recv(1, 0, 1);
  const auto r = simulate(s, config({100, 10, 0, 0.0}));
  EXPECT_EQ(r.completion, 500 + 10 + 100 + 10);
}

TEST(Simulate, DependenciesDelayPosting) {
  Schedule s(2);
  const auto c0 = s.calc(0, 50);
  s.calc(0, 70);
  s.send(0, 1, 1, {c0});
  s.recv(1, 0, 1);
  // The send becomes ready at 50, but the second calc has been ready since 0
  // and runs first, keeping the host busy until 120.
  const auto r = simulate(s, config({100, 10, 0, 0.0}));
  EXPECT_EQ(r.completion, 120 + 10 + 100 + 10);
}

TEST(Simulate, CircularWaitIsADeadlock) {
  Schedule s(2);
  for (goal::Rank r = 0; r < 2; ++r) {
    const auto in = s.recv(r, 1 - r, 8);
    s.send(r, 1 - r, 8, {in});
  }
  ASSERT_TRUE(goal::validate(s).empty());
  try {
    simulate(s, config({10, 1, 1, 0.0}));
    FAIL() << "expected a deadlock";
  } catch (const DeadlockError& e) {
    EXPECT_EQ(e.blocked_ops().size(), 4u);
  }
}

TEST(Simulate, InvalidScheduleIsRejectedBeforeRunning) {
  Schedule s(2);
  s.send(0, 1, 8);
  EXPECT_THROW(simulate(s, config({})), ValidationError);
  EXPECT_THROW(simulate(one_message(1), config({-1, 0, 0, 0.0})), InvalidArgument);
}

TEST(Simulate, AgreesWithReferenceSchedulerOnRandomSchedules) {
  std::mt19937_64 rng(2022);
  for (int trial = 0; trial < 400; ++trial) {
    const auto P = std::uniform_int_distribution<goal::Rank>(2, 8)(rng);
    const auto s = testing::random_schedule(rng, P, 40, 15);
    const auto p = testing::random_params(rng);
    const auto sim = simulate(s, config(p));
    const auto ref = testing::reference_schedule(s, p);
    ASSERT_EQ(sim.completion, ref.completion) << "trial " << trial;
    ASSERT_EQ(sim.per_rank_completion, ref.per_rank) << "trial " << trial;
  }
}

TEST(Simulate, NoiselessRunsIgnoreTheSeed) {
  const auto s = goal::gen_dissemination(16, 16);
  auto c = config({2000, 300, 300, 0.08});
  const auto a = simulate(s, c);
  c.seed = 99;
  const auto b = simulate(s, c);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.draws_used, 0u);
}

TEST(Noise, LatencyDrawReplacesTheOneWayTime) {
  auto c = config({1, 1, 0, 0.0});
  c.noise.latency = EmpiricalDistribution({1234}, Unit::nanoseconds);
  const auto r = simulate(one_message(1), c);
  EXPECT_EQ(r.completion, 1234);
  EXPECT_EQ(r.draws_used, 1u);
}

TEST(Noise, LatencyBelowOverheadsClampsAtZero) {
  auto c = config({500, 100, 0, 0.0});
  c.noise.latency = EmpiricalDistribution({50}, Unit::nanoseconds);
  EXPECT_EQ(simulate(one_message(1), c).completion, 200);
}

TEST(Noise, BandwidthDrawSetsTheByteGap) {
  auto c = config({100, 10, 0, 0.0});
  c.noise.bandwidth = EmpiricalDistribution({8.0}, Unit::gigabits_per_second);
  EXPECT_EQ(simulate(one_message(1001), c).completion, 10 + 100 + 1000 + 10);
}

TEST(Noise, EmptyDetourTraceChangesNothing) {
  const auto s = goal::gen_ring_allreduce(8, 1 << 20, 100);
  auto c = config({2000, 300, 300, 0.08});
  const auto base = simulate(s, c).completion;
  c.noise.os = DetourTrace({}, 1000);
  c.seed = 5;
  EXPECT_EQ(simulate(s, c).completion, base);
}

TEST(Noise, DetoursNeverSpeedUpARun) {
  const auto s = goal::gen_ring_allreduce(8, 1 << 20, 100);
  auto c = config({2000, 300, 300, 0.08});
  const auto base = simulate(s, c).completion;
  c.noise.os = DetourTrace({{100, 400}, {5000, 2000}}, 20000);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    c.seed = seed;
    EXPECT_GE(simulate(s, c).completion, base);
  }
}

TEST(Noise, LatencyNoiseNeverBeatsTheFastestSample) {
  const auto s = goal::gen_dissemination(8, 16);
  const LogGPParams p{900, 150, 150, 0.0};
  auto c = config(p);
  // Every sample is at least the noiseless one-way time.
  c.noise.latency = EmpiricalDistribution({1200, 1500, 4000}, Unit::nanoseconds);
  const auto base = simulate(s, config(p)).completion;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    c.seed = seed;
    EXPECT_GE(simulate(s, c).completion, base);
  }
}

TEST(RunMany, ResultsAreIndependentOfWorkerCount) {
  const auto s = goal::gen_dissemination(8, 16);
  auto c = config({900, 150, 150, 0.0});
  c.noise.latency = EmpiricalDistribution({1200, 1500, 4000, 20000}, Unit::nanoseconds);
  c.seed = 42;
  const auto serial = run_many(s, c, 64, 1);
  EXPECT_EQ(run_many(s, c, 64, 4), serial);
  EXPECT_EQ(run_many(s, c, 64, 0), serial);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    auto one = c;
    one.seed = derive_seed(c.seed, i);
    EXPECT_EQ(simulate(s, one), serial[i]);
  }
  std::set<Nanos> distinct;
  for (const auto& r : serial) distinct.insert(r.completion);
  EXPECT_GT(distinct.size(), 1u);
  EXPECT_THROW(run_many(s, c, 0), InvalidArgument);
}

TEST(DeriveSeed, StreamsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(7, i));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
  EXPECT_EQ(derive_seed(7, 3), derive_seed(7, 3));
}

TEST(CompiledSchedule, ReusableAcrossRuns) {
  const auto s = goal::gen_ring_allreduce(4, 4096, 5);
  const CompiledSchedule cs(s);
  EXPECT_EQ(cs.nranks(), 4u);
  EXPECT_EQ(cs.op_count(), s.op_count());
  const auto c = config({100, 10, 20, 0.5});
  EXPECT_EQ(simulate(cs, c), simulate(cs, c));
  EXPECT_EQ(simulate(cs, c), simulate(s, c));
}

}  // namespace
}  // namespace nsim::sim
