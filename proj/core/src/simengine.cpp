#include "nsim/simengine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <queue>
#include <random>
#include <thread>
#include <unordered_map>

#include "nsim/error.hpp"

namespace nsim::sim {

using goal::OpKind;

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t run) noexcept {
  std::uint64_t z = seed + (run + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

struct ChannelKey {
  goal::Rank src;
  goal::Rank dst;
  std::uint64_t size;
  bool operator==(const ChannelKey&) const = default;
};

struct ChannelKeyHash {
  std::size_t operator()(const ChannelKey& k) const noexcept {
    std::uint64_t h = (std::uint64_t{k.src} << 32) ^ k.dst;
    h ^= k.size + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
    return std::hash<std::uint64_t>{}(h);
  }
};

}  // namespace

CompiledSchedule::CompiledSchedule(const goal::Schedule& s) : nranks_(s.nranks) {
  const std::size_t n = s.op_count();
  rank_begin_.reserve(nranks_ + 1);
  kind_.reserve(n);
  peer_.reserve(n);
  size_.reserve(n);
  dep_count_.reserve(n);
  channel_.assign(n, 0);

  std::vector<std::uint32_t> dependent_count(n, 0);
  std::uint32_t base = 0;
  for (const auto& ops : s.ranks) {
    rank_begin_.push_back(base);
    for (const auto& op : ops) {
      kind_.push_back(op.kind);
      peer_.push_back(op.peer);
      size_.push_back(op.size);
      dep_count_.push_back(static_cast<std::uint32_t>(op.deps.size()));
      for (auto d : op.deps) ++dependent_count[base + d];
    }
    base += static_cast<std::uint32_t>(ops.size());
  }
  rank_begin_.push_back(base);

  dependents_begin_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    dependents_begin_[i + 1] = dependents_begin_[i] + dependent_count[i];
  }
  dependents_.resize(dependents_begin_[n]);
  std::vector<std::uint32_t> fill(dependents_begin_.begin(), dependents_begin_.end() - 1);

  std::unordered_map<ChannelKey, std::uint32_t, ChannelKeyHash> channels;
  for (goal::Rank r = 0; r < nranks_; ++r) {
    const auto& ops = s.ranks[r];
    const auto rb = rank_begin_[r];
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const auto& op = ops[i];
      for (auto d : op.deps) dependents_[fill[rb + d]++] = static_cast<std::uint32_t>(rb + i);
      if (op.kind == OpKind::calc) continue;
      const ChannelKey key = op.kind == OpKind::send ? ChannelKey{r, op.peer, op.size}
                                                     : ChannelKey{op.peer, r, op.size};
      auto [it, inserted] = channels.try_emplace(key, channel_count_);
      if (inserted) ++channel_count_;
      channel_[rb + i] = it->second;
    }
  }
}

class Engine {
 public:
  Engine(const CompiledSchedule& cs, const SimConfig& cfg, std::uint64_t seed)
      : cs_(cs), cfg_(cfg), rng_(seed) {}

  SimResult run() {
    const std::size_t n = cs_.op_count();
    const goal::Rank p = cs_.nranks_;
    remaining_ = cs_.dep_count_;
    channels_.assign(cs_.channel_count_, {});
    ranks_.assign(p, {});
    dirty_flag_.assign(p, false);
    if (cfg_.record_per_op) timings_.assign(n, {});

    if (cfg_.noise.os) {
      const auto span = static_cast<double>(cfg_.noise.os->span());
      for (auto& rs : ranks_) rs.phase = static_cast<Nanos>(uniform() * span);
    }

    for (goal::Rank r = 0; r < p; ++r) {
      for (auto i = cs_.rank_begin_[r]; i < cs_.rank_begin_[r + 1]; ++i) {
        if (remaining_[i] == 0) post(r, i, 0);
      }
    }
    drain_dirty(0);

    while (!events_.empty()) {
      const Nanos now = events_.top().time;
      while (!events_.empty() && events_.top().time == now) {
        const Event ev = events_.top();
        events_.pop();
        if (ev.op == kWake) {
          if (ranks_[ev.rank].pending_wake == now) ranks_[ev.rank].pending_wake = kNever;
        } else {
          finish(ev.rank, ev.op, now);
        }
        mark_dirty(ev.rank);
      }
      drain_dirty(now);
    }

    if (finished_ != n) throw DeadlockError(blocked_ops());

    SimResult result;
    result.per_rank_completion.reserve(p);
    for (const auto& rs : ranks_) {
      result.per_rank_completion.push_back(rs.completion);
      result.completion = std::max(result.completion, rs.completion);
    }
    result.draws_used = draws_;
    if (cfg_.record_per_op) {
      std::vector<std::vector<OpTiming>> per_op(p);
      for (goal::Rank r = 0; r < p; ++r) {
        per_op[r].assign(timings_.begin() + cs_.rank_begin_[r],
                         timings_.begin() + cs_.rank_begin_[r + 1]);
      }
      result.per_op = std::move(per_op);
    }
    return result;
  }

 private:
  static constexpr Nanos kNever = std::numeric_limits<Nanos>::max();
  static constexpr std::uint32_t kWake = std::numeric_limits<std::uint32_t>::max();

  struct Event {
    Nanos time;
    goal::Rank rank;
    std::uint32_t op;  // global op index, or kWake
    bool operator>(const Event& o) const {
      if (time != o.time) return time > o.time;
      if (rank != o.rank) return rank > o.rank;
      return op > o.op;
    }
  };

  using ReadyEntry = std::pair<Nanos, std::uint32_t>;  // (ready time, global op)

  struct RankState {
    std::priority_queue<ReadyEntry, std::vector<ReadyEntry>, std::greater<>> ready;
    bool busy = false;
    bool sent_any = false;
    Nanos last_msg_start = 0;
    Nanos completion = 0;
    Nanos phase = 0;
    Nanos pending_wake = kNever;
  };

  struct Channel {
    std::vector<Nanos> arrivals;
    std::size_t arrivals_head = 0;
    std::vector<std::pair<std::uint32_t, Nanos>> recvs;  // (op, post time)
    std::size_t recvs_head = 0;
  };

  double uniform() {
    ++draws_;
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }

  void mark_dirty(goal::Rank r) {
    if (!dirty_flag_[r]) {
      dirty_flag_[r] = true;
      dirty_.push_back(r);
    }
  }

  void schedule_wake(goal::Rank r, Nanos t) {
    auto& rs = ranks_[r];
    if (t < rs.pending_wake) {
      rs.pending_wake = t;
      events_.push({t, r, kWake});
    }
  }

  void drain_dirty(Nanos now) {
    std::sort(dirty_.begin(), dirty_.end());
    for (auto r : dirty_) {
      dirty_flag_[r] = false;
      try_start(r, now);
    }
    dirty_.clear();
  }

  void post(goal::Rank r, std::uint32_t op, Nanos now) {
    if (cs_.kind_[op] != OpKind::recv) {
      ranks_[r].ready.push({now, op});
      mark_dirty(r);
      return;
    }
    auto& ch = channels_[cs_.channel_[op]];
    if (ch.arrivals_head < ch.arrivals.size()) {
      ranks_[r].ready.push({std::max(now, ch.arrivals[ch.arrivals_head++]), op});
      mark_dirty(r);
    } else {
      ch.recvs.emplace_back(op, now);
    }
  }

  void deliver(std::uint32_t channel, goal::Rank receiver, Nanos arrival) {
    auto& ch = channels_[channel];
    if (ch.recvs_head < ch.recvs.size()) {
      const auto [op, posted] = ch.recvs[ch.recvs_head++];
      const Nanos ready = std::max(posted, arrival);
      ranks_[receiver].ready.push({ready, op});
      schedule_wake(receiver, ready);
    } else {
      ch.arrivals.push_back(arrival);
    }
  }

  Nanos occupy(goal::Rank r, Nanos start, Nanos work) const {
    if (!cfg_.noise.os) return start + work;
    const Nanos phase = ranks_[r].phase;
    return cfg_.noise.os->finish_time(start + phase, work) - phase;
  }

  void try_start(goal::Rank r, Nanos now) {
    auto& rs = ranks_[r];
    if (rs.busy || rs.ready.empty()) return;
    const auto [ready, op] = rs.ready.top();
    if (ready > now) {
      schedule_wake(r, ready);
      return;
    }
    rs.ready.pop();

    const auto& params = cfg_.params;
    const OpKind kind = cs_.kind_[op];
    Nanos start = now;
    Nanos work = static_cast<Nanos>(cs_.size_[op]);
    if (kind != OpKind::calc) {
      if (rs.sent_any) start = std::max(start, rs.last_msg_start + params.g);
      rs.sent_any = true;
      rs.last_msg_start = start;
      work = params.o;
    }
    const Nanos end = occupy(r, start, work);
    rs.busy = true;

    if (kind == OpKind::send) {
      double latency = static_cast<double>(params.L);
      double gap = params.G;
      if (cfg_.noise.latency) {
        const double v = cfg_.noise.latency->sample(uniform());
        latency = std::max(v - 2.0 * static_cast<double>(params.o), 0.0);
      }
      if (cfg_.noise.bandwidth) gap = bandwidth_to_G(cfg_.noise.bandwidth->sample(uniform()));
      const Nanos transfer =
          round_half_up(latency + static_cast<double>(cs_.size_[op] - 1) * gap);
      deliver(cs_.channel_[op], cs_.peer_[op], end + transfer);
    }
    if (cfg_.record_per_op) timings_[op] = {start, end};
    events_.push({end, r, op});
  }

  void finish(goal::Rank r, std::uint32_t op, Nanos now) {
    auto& rs = ranks_[r];
    rs.busy = false;
    rs.completion = std::max(rs.completion, now);
    ++finished_;
    for (auto i = cs_.dependents_begin_[op]; i < cs_.dependents_begin_[op + 1]; ++i) {
      const auto dep = cs_.dependents_[i];
      if (--remaining_[dep] == 0) post(r, dep, now);
    }
  }

  std::vector<std::string> blocked_ops() const {
    std::vector<std::string> out;
    for (goal::Rank r = 0; r < cs_.nranks_; ++r) {
      for (auto i = cs_.rank_begin_[r]; i < cs_.rank_begin_[r + 1]; ++i) {
        // An op is blocked if it never finished; finished ops released all
        // their dependents, so those still counting dependencies are blocked.
        const bool waiting_deps = remaining_[i] > 0;
        const bool waiting_msg = !waiting_deps && cs_.kind_[i] == OpKind::recv &&
                                 is_unmatched_recv(i);
        if (!waiting_deps && !waiting_msg) continue;
        std::string what = "rank " + std::to_string(r) + " op " +
                           std::to_string(i - cs_.rank_begin_[r]) + " (" +
                           std::string(goal::to_string(cs_.kind_[i]));
        if (cs_.kind_[i] != OpKind::calc) {
          what += (cs_.kind_[i] == OpKind::send ? " to " : " from ") +
                  std::to_string(cs_.peer_[i]) + ", " + std::to_string(cs_.size_[i]) + "b";
        }
        what += waiting_msg ? ", no matching send)" : ", waiting on dependencies)";
        out.push_back(std::move(what));
      }
    }
    return out;
  }

  bool is_unmatched_recv(std::uint32_t op) const {
    const auto& ch = channels_[cs_.channel_[op]];
    for (std::size_t i = ch.recvs_head; i < ch.recvs.size(); ++i) {
      if (ch.recvs[i].first == op) return true;
    }
    return false;
  }

  const CompiledSchedule& cs_;
  const SimConfig& cfg_;
  std::mt19937_64 rng_;
  std::uint64_t draws_ = 0;
  std::size_t finished_ = 0;

  std::vector<std::uint32_t> remaining_;
  std::vector<Channel> channels_;
  std::vector<RankState> ranks_;
  std::vector<goal::Rank> dirty_;
  std::vector<bool> dirty_flag_;
  std::vector<OpTiming> timings_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> events_;
};

namespace {

SimResult simulate_seeded(const CompiledSchedule& cs, const SimConfig& cfg, std::uint64_t seed) {
  return Engine(cs, cfg, seed).run();
}

}  // namespace

SimResult simulate(const CompiledSchedule& schedule, const SimConfig& cfg) {
  cfg.params.validate();
  return simulate_seeded(schedule, cfg, cfg.seed);
}

SimResult simulate(const goal::Schedule& schedule, const SimConfig& cfg) {
  goal::require_valid(schedule);
  return simulate(CompiledSchedule(schedule), cfg);
}

std::vector<SimResult> run_many(const goal::Schedule& schedule, const SimConfig& cfg,
                                std::size_t n, unsigned workers) {
  if (n < 1) throw InvalidArgument("repetition count must be at least 1");
  goal::require_valid(schedule);
  cfg.params.validate();
  const CompiledSchedule cs(schedule);

  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

  std::vector<SimResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = simulate_seeded(cs, cfg, derive_seed(cfg.seed, i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

}  // namespace nsim::sim
