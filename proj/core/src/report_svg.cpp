#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "nsim/error.hpp"
#include "nsim/report.hpp"

namespace nsim::report {
namespace {

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::fixed << v;
  return s.str();
}

std::string tick_label(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

// Maps data values onto the vertical pixel range [top, bottom].
struct Axis {
  Scale scale;
  double lo;
  double hi;
  double top;
  double bottom;

  double transform(double v) const { return scale == Scale::log2 ? std::log2(v) : v; }

  double y(double v) const {
    const double a = transform(lo);
    const double b = transform(hi);
    const double t = b > a ? (transform(v) - a) / (b - a) : 0.5;
    return bottom - t * (bottom - top);
  }

  std::vector<double> ticks() const {
    std::vector<double> out;
    if (scale == Scale::log2) {
      for (double e = std::floor(std::log2(lo)); e <= std::ceil(std::log2(hi)); e += 1.0) {
        const double v = std::exp2(e);
        if (v >= lo && v <= hi) out.push_back(v);
      }
      if (out.empty()) out = {lo, hi};
      return out;
    }
    const double range = hi - lo;
    if (range <= 0.0) return {lo};
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
      step = m * mag;
      if (step >= raw) break;
    }
    for (double v = std::ceil(lo / step) * step; v <= hi + step * 1e-9; v += step) out.push_back(v);
    return out;
  }
};

}  // namespace

void write_svg(std::ostream& out, std::span<const GroupStats> groups, const SvgOptions& options) {
  if (groups.empty()) throw InvalidArgument("nothing to plot");
  if (options.width < 100 || options.height < 100) throw InvalidArgument("plot is too small");

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& g : groups) {
    const auto& s = g.stats;
    lo = std::min({lo, s.whisker_low, s.notch_low, s.mean});
    hi = std::max({hi, s.whisker_high, s.notch_high, s.mean});
    for (double v : s.outliers) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (options.scale == Scale::log2) {
    for (const auto& g : groups) {
      const auto& s = g.stats;
      const double smallest = s.outliers.empty() ? s.whisker_low : std::min(s.whisker_low, s.outliers.front());
      if (!(smallest > 0.0) || !(s.mean > 0.0)) {
        throw InvalidArgument("log scale needs positive values; group '" + g.label + "' has " +
                              tick_label(smallest));
      }
    }
    // Notches can dip below zero for tiny groups; clip them rather than fail.
    lo = std::numeric_limits<double>::infinity();
    for (const auto& g : groups) {
      const auto& s = g.stats;
      lo = std::min({lo, s.whisker_low, s.mean, s.notch_low > 0.0 ? s.notch_low : s.whisker_low});
      if (!s.outliers.empty()) lo = std::min(lo, s.outliers.front());
    }
  }
  if (hi == lo) {
    if (options.scale == Scale::log2) {
      lo /= 2.0;
      hi *= 2.0;
    } else {
      const double pad = std::max(std::abs(lo) * 0.05, 1.0);
      lo -= pad;
      hi += pad;
    }
  }

  const double left = 80.0;
  const double right = static_cast<double>(options.width) - 20.0;
  const double top = options.title.empty() ? 20.0 : 40.0;
  const double bottom = static_cast<double>(options.height) - 40.0;
  const Axis axis{options.scale, lo, hi, top, bottom};
  auto y = [&](double v) {
    if (options.scale == Scale::log2 && v <= 0.0) return bottom;
    return axis.y(v);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
      << options.height << "\" viewBox=\"0 0 " << options.width << ' ' << options.height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty()) {
    out << "<text x=\"" << fmt((left + right) / 2) << "\" y=\"20\" text-anchor=\"middle\" "
        << "font-size=\"13\">" << escape(options.title) << "</text>\n";
  }

  // Axes and ticks.
  out << "<g stroke=\"black\" fill=\"none\">\n";
  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(top) << "\" x2=\"" << fmt(left)
      << "\" y2=\"" << fmt(bottom) << "\"/>\n";
  out << "<line x1=\"" << fmt(left) << "\" y1=\"" << fmt(bottom) << "\" x2=\"" << fmt(right)
      << "\" y2=\"" << fmt(bottom) << "\"/>\n";
  out << "</g>\n";
  for (double t : axis.ticks()) {
    const double ty = y(t);
    out << "<line x1=\"" << fmt(left - 4) << "\" y1=\"" << fmt(ty) << "\" x2=\"" << fmt(left)
        << "\" y2=\"" << fmt(ty) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(left - 6) << "\" y=\"" << fmt(ty + 4)
        << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  out << "<text transform=\"translate(14," << fmt((top + bottom) / 2)
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(options.y_label)
      << (options.scale == Scale::log2 ? " (log2)" : "") << "</text>\n";

  const double slot = (right - left) / static_cast<double>(groups.size());
  const double box_w = std::min(60.0, slot * 0.5);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    const auto& s = g.stats;
    const double cx = left + slot * (static_cast<double>(i) + 0.5);
    const double x0 = cx - box_w / 2;
    const double x1 = cx + box_w / 2;
    const double notch_in = box_w / 4;
    const double nl = std::clamp(s.notch_low, s.q1, s.q3);
    const double nh = std::clamp(s.notch_high, s.q1, s.q3);

    out << "<g class=\"box\" data-group=\"" << escape(g.label) << "\">\n";
    // Whiskers with caps.
    out << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(y(s.whisker_low)) << "\" x2=\"" << fmt(cx)
        << "\" y2=\"" << fmt(y(s.q1)) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << fmt(cx) << "\" y1=\"" << fmt(y(s.q3)) << "\" x2=\"" << fmt(cx)
        << "\" y2=\"" << fmt(y(s.whisker_high)) << "\" stroke=\"black\"/>\n";
    for (double w : {s.whisker_low, s.whisker_high}) {
      out << "<line x1=\"" << fmt(cx - box_w / 4) << "\" y1=\"" << fmt(y(w)) << "\" x2=\""
          << fmt(cx + box_w / 4) << "\" y2=\"" << fmt(y(w)) << "\" stroke=\"black\"/>\n";
    }
    // Notched box outline, clockwise from the bottom-left corner.
    out << "<path class=\"notch\" d=\"M" << fmt(x0) << ',' << fmt(y(s.q1)) << " L" << fmt(x0)
        << ',' << fmt(y(nl)) << " L" << fmt(x0 + notch_in) << ',' << fmt(y(s.median)) << " L"
        << fmt(x0) << ',' << fmt(y(nh)) << " L" << fmt(x0) << ',' << fmt(y(s.q3)) << " L"
        << fmt(x1) << ',' << fmt(y(s.q3)) << " L" << fmt(x1) << ',' << fmt(y(nh)) << " L"
        << fmt(x1 - notch_in) << ',' << fmt(y(s.median)) << " L" << fmt(x1) << ','
        << fmt(y(nl)) << " L" << fmt(x1) << ',' << fmt(y(s.q1))
        << " Z\" fill=\"#9ecae1\" stroke=\"black\"/>\n";
    out << "<line class=\"median\" x1=\"" << fmt(x0 + notch_in) << "\" y1=\"" << fmt(y(s.median))
        << "\" x2=\"" << fmt(x1 - notch_in) << "\" y2=\"" << fmt(y(s.median))
        << "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
    out << "<rect class=\"mean\" x=\"" << fmt(cx - 3) << "\" y=\"" << fmt(y(s.mean) - 3)
        << "\" width=\"6\" height=\"6\" fill=\"#2ca02c\"/>\n";
    for (double v : s.outliers) {
      const double oy = y(v);
      out << "<path class=\"outlier\" d=\"M" << fmt(cx) << ',' << fmt(oy - 4) << " L"
          << fmt(cx + 4) << ',' << fmt(oy) << " L" << fmt(cx) << ',' << fmt(oy + 4) << " L"
          << fmt(cx - 4) << ',' << fmt(oy) << " Z\" fill=\"none\" stroke=\"#555\"/>\n";
    }
    out << "<text x=\"" << fmt(cx) << "\" y=\"" << fmt(bottom + 16)
        << "\" text-anchor=\"middle\">" << escape(g.label) << "</text>\n";
    out << "</g>\n";
  }
  out << "</svg>\n";
}

}  // namespace nsim::report
