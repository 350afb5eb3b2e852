#include <algorithm>

#include "nsim/error.hpp"
#include "nsim/model.hpp"

namespace nsim {

DetourTrace::DetourTrace(std::vector<DetourEvent> events, Nanos span)
    : events_(std::move(events)), span_(span) {
  if (span_ <= 0) throw InvalidArgument("detour trace span must be positive");
  Nanos previous_end = 0;
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& ev = events_[i];
    if (ev.duration <= 0) {
      throw InvalidArgument("detour event " + std::to_string(i) + " has non-positive duration");
    }
    if (ev.start < previous_end) {
      throw InvalidArgument("detour event " + std::to_string(i) +
                            " overlaps its predecessor or is out of order");
    }
    if (ev.start + ev.duration > span_) {
      throw InvalidArgument("detour event " + std::to_string(i) + " exceeds the trace span");
    }
    previous_end = ev.start + ev.duration;
    busy_ += ev.duration;
  }
  if (busy_ >= span_) throw InvalidArgument("detour trace leaves no time for host work");
}

Nanos DetourTrace::finish_time(Nanos start, Nanos work) const {
  if (work <= 0 || events_.empty()) return start + std::max<Nanos>(work, 0);

  const Nanos free_per_cycle = span_ - busy_;
  Nanos cycle = start / span_;
  const Nanos offset = start % span_;
  // First event that has not ended at `offset`.
  auto first = std::upper_bound(events_.begin(), events_.end(), offset,
                                [](Nanos pos, const DetourEvent& ev) {
                                  return pos < ev.start + ev.duration;
                                });
  std::size_t idx = static_cast<std::size_t>(first - events_.begin());

  Nanos cur = start;
  Nanos remaining = work;
  for (;;) {
    if (idx == events_.size()) {
      idx = 0;
      ++cycle;
      // From any point before the first event of a cycle, advancing by one
      // span crosses every event exactly once.
      if (remaining > free_per_cycle) {
        const Nanos whole = (remaining - 1) / free_per_cycle;
        cycle += whole;
        cur += whole * span_;
        remaining -= whole * free_per_cycle;
      }
    }
    const DetourEvent& ev = events_[idx];
    const Nanos ev_start = cycle * span_ + ev.start;
    const Nanos ev_end = ev_start + ev.duration;
    if (cur >= ev_start) {
      cur = std::max(cur, ev_end);
      ++idx;
      continue;
    }
    const Nanos gap = ev_start - cur;
    if (remaining <= gap) return cur + remaining;
    remaining -= gap;
    cur = ev_end;
    ++idx;
  }
}

}  // namespace nsim
