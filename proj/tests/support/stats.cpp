#include "stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nsim::testing {

double ks_distance(std::vector<double> draws, std::span<const double> source) {
  std::vector<double> src(source.begin(), source.end());
  std::sort(draws.begin(), draws.end());
  std::sort(src.begin(), src.end());
  std::vector<double> points = draws;
  points.insert(points.end(), src.begin(), src.end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  const double nd = static_cast<double>(draws.size());
  const double ns = static_cast<double>(src.size());
  double worst = 0.0;
  for (double x : points) {
    const auto cd = std::upper_bound(draws.begin(), draws.end(), x) - draws.begin();
    const auto cs = std::upper_bound(src.begin(), src.end(), x) - src.begin();
    worst = std::max(worst, std::abs(static_cast<double>(cd) / nd - static_cast<double>(cs) / ns));
  }
  return worst;
}

double mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fixture_path(const std::string& name) {
  return std::string(NSIM_FIXTURE_DIR) + "/" + name;
}

noise::SampleTrace load_fixture(const std::string& name, Unit unit) {
  return noise::load_trace(fixture_path(name), unit);
}

}  // namespace nsim::testing
