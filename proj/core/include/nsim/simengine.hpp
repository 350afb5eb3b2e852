#pragma once

// Discrete-event LogGP simulator with per-message noise.
//
// Execution rules for one run:
//  * An op is posted once all of its dependencies finished. Sends and calcs
//    are ready when posted; a recv is ready at max(post time, arrival of the
//    message it matched). Matching is in order per (src, dst, size).
//  * Each rank's host executes one op at a time, in (ready time, op id)
//    order. Message ops additionally start no earlier than g after the
//    previous message op of the same rank started.
//  * send and recv occupy the host for o, calc for its duration. With an OS
//    detour trace the host makes no progress during detours, which extends
//    the occupancy. Every rank replays the trace from its own random phase.
//  * A message leaves when its send's occupancy ends and arrives
//    round(L_eff + (size - 1) * G_eff) later. Without noise L_eff = L and
//    G_eff = G. A latency draw v sets L_eff = max(v - 2o, 0) so that the
//    uncontended one-way time is v; a bandwidth draw b sets G_eff = 8 / b.
//  * Events at equal timestamps are applied in (rank, op) order.
//
// Randomness: a run with seed s uses std::mt19937_64 seeded with s. Uniforms
// are (x >> 11) * 2^-53. Per-rank detour phases are drawn first, in rank
// order, then one latency and one bandwidth draw per send, in event order.
// Run i of run_many uses derive_seed(seed, i).

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "nsim/goal.hpp"
#include "nsim/model.hpp"

namespace nsim::sim {

inline constexpr std::string_view kPrngName = "mt19937_64+splitmix64";

struct SimConfig {
  LogGPParams params;
  NoiseModel noise;
  std::uint64_t seed = 0;
  bool record_per_op = false;
};

struct OpTiming {
  Nanos start = 0;
  Nanos finish = 0;

  friend bool operator==(const OpTiming&, const OpTiming&) = default;
};

struct SimResult {
  Nanos completion = 0;
  std::vector<Nanos> per_rank_completion;
  /// Indexed [rank][op id]; present when SimConfig::record_per_op is set.
  std::optional<std::vector<std::vector<OpTiming>>> per_op;
  std::uint64_t draws_used = 0;

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

/// The (run + 1)-th output of a splitmix64 stream started at `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t run) noexcept;

/// Flattened, validated form of a schedule that can be simulated many times.
class CompiledSchedule {
 public:
  explicit CompiledSchedule(const goal::Schedule& schedule);

  goal::Rank nranks() const noexcept { return nranks_; }
  std::size_t op_count() const noexcept { return kind_.size(); }

 private:
  friend class Engine;

  goal::Rank nranks_ = 0;
  std::vector<std::uint32_t> rank_begin_;      // nranks + 1 offsets into op arrays
  std::vector<goal::OpKind> kind_;
  std::vector<goal::Rank> peer_;
  std::vector<std::uint64_t> size_;
  std::vector<std::uint32_t> dep_count_;
  std::vector<std::uint32_t> dependents_begin_;  // CSR over global op index
  std::vector<std::uint32_t> dependents_;
  std::vector<std::uint32_t> channel_;           // per send/recv op
  std::uint32_t channel_count_ = 0;
};

SimResult simulate(const CompiledSchedule& schedule, const SimConfig& cfg);

/// Validates, then simulates. Throws ValidationError or DeadlockError.
SimResult simulate(const goal::Schedule& schedule, const SimConfig& cfg);

/// n independent runs; run i uses derive_seed(cfg.seed, i). Results come back
/// in run order and do not depend on `workers` (0 = hardware concurrency).
std::vector<SimResult> run_many(const goal::Schedule& schedule, const SimConfig& cfg,
                                std::size_t n, unsigned workers = 0);

}  // namespace nsim::sim
