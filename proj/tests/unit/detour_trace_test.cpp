#include <gtest/gtest.h>

#include <random>

#include "nsim/error.hpp"
#include "nsim/model.hpp"

namespace nsim {
namespace {

// Walks time one nanosecond at a time; work advances only outside detours.
Nanos stepwise_finish(const DetourTrace& t, Nanos start, Nanos work) {
  auto busy = [&](Nanos at) {
    const Nanos off = at % t.span();
    for (const auto& ev : t.events()) {
      if (off >= ev.start && off < ev.start + ev.duration) return true;
    }
    return false;
  };
  Nanos now = start;
  while (work > 0) {
    if (!busy(now)) --work;
    ++now;
  }
  return now;
}

TEST(DetourTrace, RejectsInvalidEvents) {
  EXPECT_THROW(DetourTrace({}, 0), InvalidArgument);
  EXPECT_THROW(DetourTrace({{5, 0}}, 100), InvalidArgument);
  EXPECT_THROW(DetourTrace({{5, 10}, {12, 3}}, 100), InvalidArgument);
  EXPECT_THROW(DetourTrace({{20, 3}, {5, 3}}, 100), InvalidArgument);
  EXPECT_THROW(DetourTrace({{95, 10}}, 100), InvalidArgument);
  EXPECT_THROW(DetourTrace({{0, 100}}, 100), InvalidArgument);
  EXPECT_NO_THROW(DetourTrace({{5, 10}, {15, 3}}, 100));  // touching is fine
}

TEST(DetourTrace, NoEventsMeansNoDelay) {
  const DetourTrace t({}, 1000);
  EXPECT_EQ(t.finish_time(123, 456), 579);
  EXPECT_EQ(t.busy_time(), 0);
}

TEST(DetourTrace, WorkStallsDuringDetour) {
  const DetourTrace t({{10, 5}}, 100);
  EXPECT_EQ(t.finish_time(0, 10), 10);   // ends exactly when the detour begins
  EXPECT_EQ(t.finish_time(0, 11), 16);   // one ns more after the detour
  EXPECT_EQ(t.finish_time(12, 1), 16);   // starts inside the detour
  EXPECT_EQ(t.finish_time(15, 1), 16);
  EXPECT_EQ(t.finish_time(0, 0), 0);
}

TEST(DetourTrace, TraceRepeatsCyclically) {
  const DetourTrace t({{10, 5}}, 100);
  EXPECT_EQ(t.finish_time(100, 11), 116);
  EXPECT_EQ(t.finish_time(205, 10), 220);
  // 95 free ns per cycle: 1000 ns of work from 0 crosses 11 detours.
  EXPECT_EQ(t.finish_time(0, 1000), stepwise_finish(t, 0, 1000));
}

TEST(DetourTrace, MatchesStepwiseReferenceOnRandomTraces) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<Nanos> span_d(20, 400);
    const Nanos span = span_d(rng);
    std::vector<DetourEvent> events;
    Nanos at = std::uniform_int_distribution<Nanos>(0, 10)(rng);
    while (true) {
      const Nanos d = std::uniform_int_distribution<Nanos>(1, 12)(rng);
      if (at + d > span) break;
      events.push_back({at, d});
      at += d + std::uniform_int_distribution<Nanos>(0, 30)(rng);
    }
    Nanos busy = 0;
    for (const auto& e : events) busy += e.duration;
    if (busy >= span) continue;
    const DetourTrace t(events, span);
    for (int q = 0; q < 20; ++q) {
      const Nanos start = std::uniform_int_distribution<Nanos>(0, 3 * span)(rng);
      const Nanos work = std::uniform_int_distribution<Nanos>(0, 5 * span)(rng);
      ASSERT_EQ(t.finish_time(start, work), stepwise_finish(t, start, work))
          << "span " << span << " start " << start << " work " << work;
    }
  }
}

TEST(DetourTrace, FinishIsMonotoneInStartAndWork) {
  const DetourTrace t({{3, 4}, {20, 9}, {50, 1}}, 64);
  for (Nanos s = 0; s < 200; ++s) {
    for (Nanos w = 0; w < 150; w += 7) {
      EXPECT_LE(t.finish_time(s, w), t.finish_time(s + 1, w));
      EXPECT_LE(t.finish_time(s, w), t.finish_time(s, w + 1));
      EXPECT_GE(t.finish_time(s, w), s + w);
    }
  }
}

}  // namespace
}  // namespace nsim
