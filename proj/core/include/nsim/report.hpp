#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nsim::report {

// Quartiles interpolate linearly between order statistics (type 7). Whiskers
// reach the most extreme samples within the 1.5 IQR fences, fences included,
// and never retract inside the box. Notch is the McGill interval
// median +- 1.57 IQR / sqrt(n).
struct BoxStats {
  std::size_t n = 0;
  double mean = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  double notch_low = 0.0;
  double notch_high = 0.0;
  std::vector<double> outliers;  // ascending

  bool operator==(const BoxStats&) const = default;
};

inline constexpr double kWhiskerFactor = 1.5;
inline constexpr double kNotchFactor = 1.57;

/// Type-7 quantile of already sorted data, p in [0, 1].
double quantile_sorted(std::span<const double> sorted, double p);

BoxStats box_stats(std::span<const double> samples);

struct Group {
  std::string label;
  std::vector<double> samples;
};

struct GroupStats {
  std::string label;
  BoxStats stats;
  std::vector<double> samples;  // kept only when raw output is requested
};

std::vector<GroupStats> summarize(std::span<const Group> groups, bool keep_samples = false);

enum class Format { csv, json, svg };
std::string_view to_string(Format format) noexcept;
Format format_from_string(std::string_view text);

enum class Scale { linear, log2 };

struct SvgOptions {
  std::string title;
  std::string y_label = "completion time [ns]";
  Scale scale = Scale::linear;
  int width = 640;
  int height = 400;
};

inline constexpr std::string_view kJsonSchema = "nsim.boxstats/1";

/// One row per group; outliers are ';'-joined. With raw samples a second
/// section `group,sample` follows after a blank line.
void write_csv(std::ostream& out, std::span<const GroupStats> groups);
void write_json(std::ostream& out, std::span<const GroupStats> groups);
std::vector<GroupStats> read_json(std::istream& in);
void write_svg(std::ostream& out, std::span<const GroupStats> groups, const SvgOptions& options);

/// Writes to `path`, or to stdout when path is "-".
void emit(std::span<const GroupStats> groups, Format format, const std::filesystem::path& path,
          const SvgOptions& options = {});

}  // namespace nsim::report
