#include <algorithm>
#include <limits>

#include "nsim/bench.hpp"
#include "nsim/error.hpp"

namespace nsim::bench {
namespace {

Nanos since(Clock::time_point origin, Clock::time_point t) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(t - origin).count();
}

}  // namespace

std::vector<DetourEvent> filter_detours(std::span<const LoopSample> iterations, Nanos t_min,
                                        double threshold) {
  if (t_min <= 0) throw InvalidArgument("t_min must be positive");
  const double limit = threshold * static_cast<double>(t_min);
  std::vector<DetourEvent> out;
  for (const auto& it : iterations) {
    if (static_cast<double>(it.duration) > limit) {
      out.push_back({it.timestamp, it.duration - t_min});
    }
  }
  return out;
}

DetourResult selfish_detour(const DetourConfig& config) {
  if (config.threshold <= 1.0) throw InvalidArgument("detour threshold must exceed 1");
  if (config.probe_iterations < 1) throw InvalidArgument("probe needs at least one iteration");

  // Probe: the fastest observed iteration of the same loop.
  Nanos t_min = std::numeric_limits<Nanos>::max();
  Nanos resolution = std::numeric_limits<Nanos>::max();
  auto previous = Clock::now();
  for (std::size_t i = 0; i < config.probe_iterations; ++i) {
    const auto now = Clock::now();
    const Nanos d = since(previous, now);
    t_min = std::min(t_min, d);
    if (d > 0) resolution = std::min(resolution, d);
    previous = now;
  }
  if (t_min <= 0 || resolution > t_min) {
    throw InvalidArgument("clock resolution (" +
                          (resolution == std::numeric_limits<Nanos>::max()
                               ? std::string("unbounded")
                               : std::to_string(resolution) + " ns") +
                          ") is coarser than one loop iteration; refusing to measure");
  }

  const double limit = config.threshold * static_cast<double>(t_min);
  std::vector<DetourEvent> events;
  events.reserve(std::min<std::size_t>(config.target_records, 1 << 20));
  std::uint64_t loops = 0;

  const auto origin = Clock::now();
  const auto deadline = origin + config.max_runtime;
  previous = origin;
  while (events.size() < config.target_records) {
    const auto now = Clock::now();
    ++loops;
    const Nanos d = since(previous, now);
    if (static_cast<double>(d) > limit) {
      events.push_back({since(origin, previous), d - t_min});
      if (now >= deadline) break;
    } else if ((loops & 0xFFF) == 0 && now >= deadline) {
      break;
    }
    previous = now;
  }
  const Nanos span = std::max<Nanos>(since(origin, Clock::now()), 1);

  DetourResult result{t_min, DetourTrace({}, span), loops,
                      events.size() >= config.target_records};
  // Each detour ends before the next iteration starts, so events are already
  // ordered and disjoint; the span may need to cover the final one.
  Nanos end = 0;
  for (const auto& ev : events) end = std::max(end, ev.start + ev.duration);
  result.trace = DetourTrace(std::move(events), std::max(span, end + 1));
  return result;
}

}  // namespace nsim::bench
