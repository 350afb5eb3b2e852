#pragma once

// LogGP machine parameters, empirical noise distributions and OS-noise detour
// traces. All time is carried as signed 64-bit integer nanoseconds; the only
// real-valued timing parameter is the per-byte gap G.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsim {

using Nanos = std::int64_t;

/// Rounds half away from zero toward +inf, i.e. floor(x + 0.5).
Nanos round_half_up(double x);

enum class Unit {
  nanoseconds,
  gigabits_per_second,
  nanoseconds_per_byte,
  ratio,  // dimensionless, produced by normalization
};

std::string_view to_string(Unit unit) noexcept;
/// Accepts the short CSV spellings ("ns", "gbps", "ns_per_byte", "ratio").
Unit unit_from_string(std::string_view text);

struct LogGPParams {
  Nanos L = 0;     // network latency
  Nanos o = 0;     // per-message host overhead, charged on send and on recv
  Nanos g = 0;     // minimum gap between message injections on one host
  double G = 0.0;  // gap per byte, ns/B

  /// Throws InvalidArgument when any parameter is negative or G is not finite.
  void validate() const;

  friend bool operator==(const LogGPParams&, const LogGPParams&) = default;
};

/// T(s) = 2o + L + (s-1)G, rounded half-up to whole nanoseconds.
Nanos message_time(const LogGPParams& params, std::uint64_t size);

/// Per-byte gap in ns/B for a bandwidth in Gb/s.
double bandwidth_to_G(double gbps);

/// Sorted sample multiset sampled through the step-function inverse ECDF, so
/// every draw is a value that was actually observed.
class EmpiricalDistribution {
 public:
  EmpiricalDistribution(std::vector<double> samples, Unit unit);

  /// samples[floor(u * count)] for u in [0, 1).
  double sample(double u) const;

  /// Fraction of samples <= x.
  double ecdf(double x) const;

  std::span<const double> samples() const noexcept { return samples_; }
  std::size_t count() const noexcept { return samples_.size(); }
  Unit unit() const noexcept { return unit_; }
  double min() const noexcept { return samples_.front(); }
  double max() const noexcept { return samples_.back(); }

 private:
  std::vector<double> samples_;
  Unit unit_;
};

struct DetourEvent {
  Nanos start = 0;     // offset since trace begin
  Nanos duration = 0;

  friend bool operator==(const DetourEvent&, const DetourEvent&) = default;
};

/// Measured OS-noise detours, replayed cyclically onto host occupancy.
class DetourTrace {
 public:
  /// Events must be sorted, disjoint, positive-length and inside [0, span).
  /// The trace may not be fully covered by detours.
  DetourTrace(std::vector<DetourEvent> events, Nanos span);

  const std::vector<DetourEvent>& events() const noexcept { return events_; }
  Nanos span() const noexcept { return span_; }
  Nanos busy_time() const noexcept { return busy_; }

  /// Time at which `work` ns of host work started at trace time `start`
  /// completes when the host makes no progress during detours. The trace
  /// repeats with period span(); `start` may exceed it.
  Nanos finish_time(Nanos start, Nanos work) const;

 private:
  std::vector<DetourEvent> events_;
  Nanos span_;
  Nanos busy_ = 0;
};

/// Noise sources. Any subset may be absent; none present is the noiseless case.
struct NoiseModel {
  /// One-way small-message times (ns). A draw replaces the 2o + L term.
  std::optional<EmpiricalDistribution> latency;
  /// Achieved bandwidths (Gb/s). A draw sets the message's G.
  std::optional<EmpiricalDistribution> bandwidth;
  std::optional<DetourTrace> os;

  bool noiseless() const noexcept { return !latency && !bandwidth && !os; }
};

struct Calibration {
  LogGPParams params;
  double o_fraction = 0.5;
  /// Set when the large-message minimum was faster than the small-message
  /// minimum; G is then reported as 0.
  bool degenerate = false;
};

/// Fits L, o, g, G from minimum one-way times of 1-byte messages and of
/// `large_size`-byte messages. o = round(o_fraction * t1 / 2), L = t1 - 2o,
/// G = (t_large - t1) / (large_size - 1) clamped at 0, g = o.
Calibration calibrate(std::span<const double> small_one_way,
                      std::span<const double> large_one_way,
                      std::uint64_t large_size, double o_fraction = 0.5);

}  // namespace nsim
