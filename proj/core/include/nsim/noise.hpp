#pragma once

// Per-sample measurement traces and the analytics applied to them.
//
// Trace CSV format (LF line endings, '.' decimal separator):
//
//   # optional comment lines; "# span_ns=<N>" records a detour trace span
//   timestamp_ns,value,unit
//   0,1190,ns
//   1000,1200,ns
//
// unit is one of ns, gbps, ns_per_byte, ratio and must be identical on
// every row.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "nsim/model.hpp"

namespace nsim::noise {

struct TraceRow {
  Nanos timestamp = 0;
  double value = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct SampleTrace {
  std::vector<TraceRow> rows;
  Unit unit = Unit::nanoseconds;
  /// Total observation window, when known (detour traces).
  std::optional<Nanos> span;

  std::vector<double> values() const;
  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }

  /// Throws ValidationError on decreasing timestamps or on non-positive
  /// values for latency/bandwidth units.
  void validate() const;
};

SampleTrace read_trace(std::istream& in, Unit expected_unit, const std::string& source = "<stream>");
SampleTrace load_trace(const std::filesystem::path& path, Unit expected_unit);

void write_trace(std::ostream& out, const SampleTrace& trace);
void save_trace(const std::filesystem::path& path, const SampleTrace& trace);

EmpiricalDistribution build_distribution(const SampleTrace& trace);

/// Each value divided by the trace minimum; the result's minimum is exactly 1.
SampleTrace normalize_min(const SampleTrace& trace);
/// Each value divided by the trace maximum; the result's maximum is exactly 1.
SampleTrace normalize_max(const SampleTrace& trace);

enum class Side { largest, smallest };

/// The ceil(frac * n) most extreme rows on `side`, kept in timestamp order.
/// Ties at the cut-off go to the earlier row.
SampleTrace top_fraction(const SampleTrace& trace, double frac, Side side);

/// Gb/s achieved by `size` bytes in `half_rtt_ns`.
double bandwidth_from_rtt(std::uint64_t size, double half_rtt_ns);

/// Rows of (start, duration) in ns. Span defaults to the trace's recorded
/// span or else the end of the last detour plus one nanosecond.
DetourTrace to_detour_trace(const SampleTrace& trace);
SampleTrace from_detour_trace(const DetourTrace& detours);

Calibration calibrate(const SampleTrace& small_one_way, const SampleTrace& large_one_way,
                      std::uint64_t large_size, double o_fraction = 0.5);

}  // namespace nsim::noise
