#include "nsim/noise.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "nsim/error.hpp"

namespace nsim::noise {
namespace {

constexpr std::string_view kHeader = "timestamp_ns,value,unit";
constexpr std::string_view kSpanPrefix = "# span_ns=";

bool requires_positive(Unit unit) { return unit != Unit::ratio; }

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto* first = text.data();
  const auto* last = first + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return !text.empty() && ec == std::errc{} && ptr == last;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

SampleTrace scaled(const SampleTrace& t, double divisor) {
  SampleTrace out;
  out.unit = Unit::ratio;
  out.span = t.span;
  out.rows.reserve(t.rows.size());
  for (const auto& row : t.rows) out.rows.push_back({row.timestamp, row.value / divisor});
  return out;
}

}  // namespace

std::vector<double> SampleTrace::values() const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row.value);
  return out;
}

void SampleTrace::validate() const {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].timestamp < rows[i - 1].timestamp) {
      problems.push_back("row " + std::to_string(i) + ": timestamp decreases");
    }
    if (!std::isfinite(rows[i].value)) {
      problems.push_back("row " + std::to_string(i) + ": value is not finite");
    } else if (requires_positive(unit) && rows[i].value <= 0.0) {
      problems.push_back("row " + std::to_string(i) + ": value must be positive");
    }
  }
  if (!problems.empty()) throw ValidationError("invalid trace", std::move(problems));
}

SampleTrace read_trace(std::istream& in, Unit expected_unit, const std::string& source) {
  SampleTrace trace;
  trace.unit = expected_unit;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  const auto where = [&] { return source + ":" + std::to_string(line_no); };

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line.starts_with(kSpanPrefix)) {
        Nanos span = 0;
        if (!parse_number(std::string_view(line).substr(kSpanPrefix.size()), span) || span <= 0) {
          throw ParseError("malformed span comment in " + source, line_no, 1);
        }
        trace.span = span;
      }
      continue;
    }
    if (!header_seen) {
      if (line != kHeader) {
        throw ParseError("expected header '" + std::string(kHeader) + "' in " + source, line_no, 1);
      }
      header_seen = true;
      continue;
    }

    std::string_view rest(line);
    std::string_view fields[3];
    std::size_t column = 1;
    std::size_t columns[3] = {1, 1, 1};
    for (int f = 0; f < 3; ++f) {
      const auto comma = rest.find(',');
      if ((f < 2) == (comma == std::string_view::npos)) {
        throw ParseError("expected 3 comma-separated fields in " + source, line_no, column);
      }
      columns[f] = column;
      fields[f] = rest.substr(0, comma);
      if (f < 2) {
        rest.remove_prefix(comma + 1);
        column += comma + 1;
      }
    }

    TraceRow row;
    if (!parse_number(fields[0], row.timestamp)) {
      throw ParseError("malformed timestamp '" + std::string(fields[0]) + "' in " + source,
                       line_no, columns[0]);
    }
    if (!parse_number(fields[1], row.value) || !std::isfinite(row.value)) {
      throw ParseError("malformed value '" + std::string(fields[1]) + "' in " + source, line_no,
                       columns[1]);
    }
    Unit unit;
    try {
      unit = unit_from_string(fields[2]);
    } catch (const InvalidArgument&) {
      throw ParseError("unknown unit '" + std::string(fields[2]) + "' in " + source, line_no,
                       columns[2]);
    }
    if (unit != expected_unit) {
      throw ValidationError(where() + ": unit mismatch",
                            {"expected " + std::string(to_string(expected_unit)) + ", found " +
                             std::string(to_string(unit))});
    }
    if (!trace.rows.empty() && row.timestamp < trace.rows.back().timestamp) {
      throw ValidationError(where() + ": timestamps must be nondecreasing",
                            {"timestamp " + std::to_string(row.timestamp) + " after " +
                             std::to_string(trace.rows.back().timestamp)});
    }
    if (requires_positive(unit) && row.value <= 0.0) {
      throw ValidationError(where() + ": values must be positive", {std::string(fields[1])});
    }
    trace.rows.push_back(row);
  }
  if (trace.rows.empty()) throw ValidationError(source + ": trace has no samples", {});
  return trace;
}

SampleTrace load_trace(const std::filesystem::path& path, Unit expected_unit) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace file " + path.string());
  return read_trace(in, expected_unit, path.string());
}

void write_trace(std::ostream& out, const SampleTrace& trace) {
  if (trace.span) out << kSpanPrefix << *trace.span << "\n";
  out << kHeader << "\n";
  const auto unit = to_string(trace.unit);
  for (const auto& row : trace.rows) {
    out << row.timestamp << ',' << format_double(row.value) << ',' << unit << '\n';
  }
}

void save_trace(const std::filesystem::path& path, const SampleTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trace file " + path.string());
  write_trace(out, trace);
  if (!out) throw IoError("failed writing trace file " + path.string());
}

EmpiricalDistribution build_distribution(const SampleTrace& trace) {
  if (trace.empty()) throw InvalidArgument("cannot build a distribution from an empty trace");
  return EmpiricalDistribution(trace.values(), trace.unit);
}

SampleTrace normalize_min(const SampleTrace& trace) {
  if (trace.empty()) throw InvalidArgument("cannot normalize an empty trace");
  const auto it = std::min_element(trace.rows.begin(), trace.rows.end(),
                                   [](const auto& a, const auto& b) { return a.value < b.value; });
  if (!(it->value > 0.0)) throw InvalidArgument("normalization needs a positive minimum");
  return scaled(trace, it->value);
}

SampleTrace normalize_max(const SampleTrace& trace) {
  if (trace.empty()) throw InvalidArgument("cannot normalize an empty trace");
  const auto it = std::max_element(trace.rows.begin(), trace.rows.end(),
                                   [](const auto& a, const auto& b) { return a.value < b.value; });
  if (!(it->value > 0.0)) throw InvalidArgument("normalization needs a positive maximum");
  return scaled(trace, it->value);
}

SampleTrace top_fraction(const SampleTrace& trace, double frac, Side side) {
  if (!(frac > 0.0 && frac <= 1.0)) throw InvalidArgument("fraction must lie in (0, 1]");
  const std::size_t n = trace.rows.size();
  // The epsilon absorbs representation error such as 0.01 * 1000 > 10.
  const auto wanted = static_cast<std::size_t>(std::ceil(frac * static_cast<double>(n) - 1e-9));
  const auto keep = std::min<std::size_t>(n, std::max<std::size_t>(wanted, 1));

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  // Row index breaks ties, so the earlier timestamp wins.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return side == Side::largest ? trace.rows[a].value > trace.rows[b].value
                                 : trace.rows[a].value < trace.rows[b].value;
  });
  order.resize(keep);
  std::sort(order.begin(), order.end());

  SampleTrace out;
  out.unit = trace.unit;
  out.span = trace.span;
  out.rows.reserve(keep);
  for (auto i : order) out.rows.push_back(trace.rows[i]);
  return out;
}

double bandwidth_from_rtt(std::uint64_t size, double half_rtt_ns) {
  if (!(half_rtt_ns > 0.0)) throw InvalidArgument("half round-trip time must be positive");
  return 8.0 * static_cast<double>(size) / half_rtt_ns;
}

DetourTrace to_detour_trace(const SampleTrace& trace) {
  if (trace.unit != Unit::nanoseconds) throw InvalidArgument("detour traces are in ns");
  std::vector<DetourEvent> events;
  events.reserve(trace.rows.size());
  Nanos end = 0;
  for (const auto& row : trace.rows) {
    events.push_back({row.timestamp, round_half_up(row.value)});
    end = std::max(end, row.timestamp + events.back().duration);
  }
  return DetourTrace(std::move(events), trace.span.value_or(end + 1));
}

SampleTrace from_detour_trace(const DetourTrace& detours) {
  SampleTrace out;
  out.unit = Unit::nanoseconds;
  out.span = detours.span();
  for (const auto& ev : detours.events()) {
    out.rows.push_back({ev.start, static_cast<double>(ev.duration)});
  }
  return out;
}

Calibration calibrate(const SampleTrace& small_one_way, const SampleTrace& large_one_way,
                      std::uint64_t large_size, double o_fraction) {
  const auto small = small_one_way.values();
  const auto large = large_one_way.values();
  return nsim::calibrate(small, large, large_size, o_fraction);
}

}  // namespace nsim::noise
