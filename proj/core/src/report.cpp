#include "nsim/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <numeric>
#include <sstream>

#include "nsim/error.hpp"

namespace nsim::report {
namespace {

using nlohmann::json;

// Shortest round-trip text for a double.
std::string number(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

json stats_to_json(const BoxStats& s) {
  return json{{"n", s.n},
              {"mean", s.mean},
              {"median", s.median},
              {"q1", s.q1},
              {"q3", s.q3},
              {"iqr", s.iqr},
              {"whisker_low", s.whisker_low},
              {"whisker_high", s.whisker_high},
              {"notch_low", s.notch_low},
              {"notch_high", s.notch_high},
              {"outliers", s.outliers}};
}

BoxStats stats_from_json(const json& j) {
  BoxStats s;
  s.n = j.at("n").get<std::size_t>();
  s.mean = j.at("mean").get<double>();
  s.median = j.at("median").get<double>();
  s.q1 = j.at("q1").get<double>();
  s.q3 = j.at("q3").get<double>();
  s.iqr = j.at("iqr").get<double>();
  s.whisker_low = j.at("whisker_low").get<double>();
  s.whisker_high = j.at("whisker_high").get<double>();
  s.notch_low = j.at("notch_low").get<double>();
  s.notch_high = j.at("notch_high").get<double>();
  s.outliers = j.at("outliers").get<std::vector<double>>();
  return s;
}

}  // namespace

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidArgument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("quantile probability outside [0, 1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BoxStats box_stats(std::span<const double> samples) {
  if (samples.empty()) throw InvalidArgument("box statistics need at least one sample");
  for (double v : samples) {
    if (!std::isfinite(v)) throw InvalidArgument("box statistics need finite samples");
  }
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  BoxStats s;
  s.n = sorted.size();
  // Summing in sorted order makes the mean independent of input order.
  s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(s.n);
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  s.iqr = s.q3 - s.q1;

  const double low_fence = s.q1 - kWhiskerFactor * s.iqr;
  const double high_fence = s.q3 + kWhiskerFactor * s.iqr;
  const auto first_in = std::lower_bound(sorted.begin(), sorted.end(), low_fence);
  const auto last_in = std::upper_bound(sorted.begin(), sorted.end(), high_fence);
  s.whisker_low = (first_in == sorted.end() || *first_in > s.q1) ? s.q1 : *first_in;
  s.whisker_high = (last_in == sorted.begin() || *(last_in - 1) < s.q3) ? s.q3 : *(last_in - 1);

  const double half_notch = kNotchFactor * s.iqr / std::sqrt(static_cast<double>(s.n));
  s.notch_low = s.median - half_notch;
  s.notch_high = s.median + half_notch;

  for (double v : sorted) {
    if (v < s.whisker_low || v > s.whisker_high) s.outliers.push_back(v);
  }
  return s;
}

std::vector<GroupStats> summarize(std::span<const Group> groups, bool keep_samples) {
  std::vector<GroupStats> out;
  out.reserve(groups.size());
  for (const auto& g : groups) {
    out.push_back({g.label, box_stats(g.samples), keep_samples ? g.samples : std::vector<double>{}});
  }
  return out;
}

std::string_view to_string(Format format) noexcept {
  switch (format) {
    case Format::csv: return "csv";
    case Format::json: return "json";
    case Format::svg: return "svg";
  }
  return "csv";
}

Format format_from_string(std::string_view text) {
  if (text == "csv") return Format::csv;
  if (text == "json") return Format::json;
  if (text == "svg") return Format::svg;
  throw InvalidArgument("unknown report format '" + std::string(text) + "'");
}

void write_csv(std::ostream& out, std::span<const GroupStats> groups) {
  out << "group,n,mean,median,q1,q3,iqr,whisker_low,whisker_high,notch_low,notch_high,outliers\n";
  bool any_raw = false;
  for (const auto& g : groups) {
    const auto& s = g.stats;
    out << g.label << ',' << s.n << ',' << number(s.mean) << ',' << number(s.median) << ','
        << number(s.q1) << ',' << number(s.q3) << ',' << number(s.iqr) << ','
        << number(s.whisker_low) << ',' << number(s.whisker_high) << ',' << number(s.notch_low)
        << ',' << number(s.notch_high) << ',';
    for (std::size_t i = 0; i < s.outliers.size(); ++i) {
      if (i) out << ';';
      out << number(s.outliers[i]);
    }
    out << '\n';
    any_raw = any_raw || !g.samples.empty();
  }
  if (!any_raw) return;
  out << "\ngroup,sample\n";
  for (const auto& g : groups) {
    for (double v : g.samples) out << g.label << ',' << number(v) << '\n';
  }
}

void write_json(std::ostream& out, std::span<const GroupStats> groups) {
  json doc{{"schema", kJsonSchema}, {"groups", json::array()}};
  for (const auto& g : groups) {
    json entry{{"label", g.label}, {"stats", stats_to_json(g.stats)}};
    if (!g.samples.empty()) entry["samples"] = g.samples;
    doc["groups"].push_back(std::move(entry));
  }
  out << doc.dump(2) << '\n';
}

std::vector<GroupStats> read_json(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), 1, e.byte);
  }
  try {
    if (doc.at("schema").get<std::string>() != kJsonSchema) {
      throw ValidationError("unsupported box statistics schema", {doc.at("schema").dump()});
    }
    std::vector<GroupStats> out;
    for (const auto& entry : doc.at("groups")) {
      GroupStats g;
      g.label = entry.at("label").get<std::string>();
      g.stats = stats_from_json(entry.at("stats"));
      if (entry.contains("samples")) g.samples = entry.at("samples").get<std::vector<double>>();
      out.push_back(std::move(g));
    }
    return out;
  } catch (const json::exception& e) {
    throw ValidationError("malformed box statistics document", {e.what()});
  }
}

void emit(std::span<const GroupStats> groups, Format format, const std::filesystem::path& path,
          const SvgOptions& options) {
  if (groups.empty()) throw InvalidArgument("nothing to report");
  auto write = [&](std::ostream& out) {
    switch (format) {
      case Format::csv: write_csv(out, groups); break;
      case Format::json: write_json(out, groups); break;
      case Format::svg: write_svg(out, groups, options); break;
    }
  };
  if (path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  // Render first so a validation failure leaves no partial file behind.
  std::ostringstream buffer;
  write(buffer);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << buffer.str();
  if (!out.flush()) throw IoError("failed writing " + path.string());
}

}  // namespace nsim::report
