#pragma once

// Host microbenchmarks that produce sample traces: barrier-synchronized
// multi-connection ping-pong, its bidirectional variant, the selfish-detour
// OS-noise loop, and a runner that executes a GOAL schedule over real
// loopback sockets.

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nsim/goal.hpp"
#include "nsim/model.hpp"
#include "nsim/noise.hpp"
#include "nsim/transport.hpp"

namespace nsim::bench {

using Clock = std::chrono::steady_clock;

enum class BenchMode { pingpong, pingpong_bidir, detour };
enum class Role { initiator, responder };

struct BenchPlan {
  BenchMode mode = BenchMode::pingpong;
  std::uint64_t size = 1;
  std::uint32_t iterations = 1000;
  std::uint32_t warmup_iterations = 10;
  std::uint16_t connections = 1;
  Nanos inter_message_interval = 0;
  std::string peer = "127.0.0.1:7070";
  Role role = Role::initiator;

  void validate() const;
};

/// Opens one connection to the responder.
using Connector = std::function<std::unique_ptr<Stream>()>;

/// Splits `size` bytes into `connections` contiguous non-empty parts whose
/// sizes differ by at most one byte.
std::vector<std::uint64_t> partition_payload(std::uint64_t size, std::uint16_t connections);

/// Initiator side. Every iteration releases all connection workers through a
/// barrier, each worker echoes its part, and the iteration's RTT runs from
/// the release to the completion of the slowest worker. Returns RTT/2 (ns)
/// for the measured iterations, stamped relative to `epoch` (default: the
/// end of connection setup).
noise::SampleTrace pingpong(const BenchPlan& plan, const Connector& connect,
                            std::optional<Clock::time_point> epoch = std::nullopt);

/// Responder side of one connection: reads the setup message, then echoes
/// the announced payload for the announced number of iterations.
void serve_connection(Stream& stream);

/// Accepts one benchmark session (the first connection announces how many
/// follow) and serves every connection on its own thread.
void serve_session(TcpListener& listener);

/// Two concurrent ping-pongs started from opposite ends, timed against a
/// shared epoch. Returns (a->b trace, b->a trace).
std::pair<noise::SampleTrace, noise::SampleTrace> pingpong_bidirectional(
    const BenchPlan& plan, const Connector& a_to_b, const Connector& b_to_a);

struct LoopSample {
  Nanos timestamp = 0;
  Nanos duration = 0;
};

/// Detours from raw loop iterations: every iteration strictly longer than
/// threshold * t_min becomes (timestamp, duration - t_min).
std::vector<DetourEvent> filter_detours(std::span<const LoopSample> iterations, Nanos t_min,
                                        double threshold = 9.0);

struct DetourConfig {
  std::size_t target_records = 10'000;
  double threshold = 9.0;
  std::size_t probe_iterations = 10'000;
  /// Stop early when the target is not reached within this time.
  std::chrono::nanoseconds max_runtime = std::chrono::seconds(30);
};

struct DetourResult {
  Nanos t_min = 0;
  DetourTrace trace;
  std::uint64_t loop_iterations = 0;
  bool reached_target = false;
};

/// Selfish detour. Throws Error(invalid_argument) when the clock cannot
/// resolve a single loop iteration.
DetourResult selfish_detour(const DetourConfig& config);

struct ExecutionResult {
  Nanos completion = 0;
  std::vector<Nanos> per_rank;
};

/// Runs a schedule with one thread per rank over TCP loopback connections
/// (one connection per communicating rank pair). Sends are eager; recvs block
/// until their payload has been read; calcs spin for their duration.
class LoopbackExecutor {
 public:
  explicit LoopbackExecutor(const goal::Schedule& schedule);
  ~LoopbackExecutor();
  LoopbackExecutor(const LoopbackExecutor&) = delete;
  LoopbackExecutor& operator=(const LoopbackExecutor&) = delete;

  ExecutionResult run();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace nsim::bench
