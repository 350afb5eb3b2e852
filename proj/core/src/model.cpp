#include "nsim/model.hpp"

#include <algorithm>
#include <cmath>

#include "nsim/error.hpp"

namespace nsim {

Nanos round_half_up(double x) { return static_cast<Nanos>(std::floor(x + 0.5)); }

std::string_view to_string(Unit unit) noexcept {
  switch (unit) {
    case Unit::nanoseconds: return "ns";
    case Unit::gigabits_per_second: return "gbps";
    case Unit::nanoseconds_per_byte: return "ns_per_byte";
    case Unit::ratio: return "ratio";
  }
  return "?";
}

Unit unit_from_string(std::string_view text) {
  if (text == "ns") return Unit::nanoseconds;
  if (text == "gbps") return Unit::gigabits_per_second;
  if (text == "ns_per_byte") return Unit::nanoseconds_per_byte;
  if (text == "ratio") return Unit::ratio;
  throw InvalidArgument("unknown unit '" + std::string(text) + "'");
}

void LogGPParams::validate() const {
  if (L < 0 || o < 0 || g < 0) {
    throw InvalidArgument("LogGP parameters L, o, g must be non-negative");
  }
  if (!std::isfinite(G) || G < 0.0) {
    throw InvalidArgument("LogGP parameter G must be finite and non-negative");
  }
}

Nanos message_time(const LogGPParams& params, std::uint64_t size) {
  if (size == 0) throw InvalidArgument("message size must be at least 1 byte");
  const double exact = static_cast<double>(2 * params.o + params.L) +
                       static_cast<double>(size - 1) * params.G;
  return round_half_up(exact);
}

double bandwidth_to_G(double gbps) {
  if (!(gbps > 0.0) || !std::isfinite(gbps)) {
    throw InvalidArgument("bandwidth must be positive");
  }
  return 8.0 / gbps;
}

EmpiricalDistribution::EmpiricalDistribution(std::vector<double> samples, Unit unit)
    : samples_(std::move(samples)), unit_(unit) {
  if (samples_.empty()) throw InvalidArgument("empirical distribution needs at least one sample");
  for (double v : samples_) {
    if (!std::isfinite(v)) throw InvalidArgument("empirical distribution sample is not finite");
  }
  std::sort(samples_.begin(), samples_.end());
  if (unit_ != Unit::ratio && samples_.front() <= 0.0) {
    throw InvalidArgument("latency and rate samples must be positive");
  }
}

double EmpiricalDistribution::sample(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw InvalidArgument("quantile must lie in [0, 1)");
  auto index = static_cast<std::size_t>(u * static_cast<double>(samples_.size()));
  // u * n can round up to n for u just below 1.
  index = std::min(index, samples_.size() - 1);
  return samples_[index];
}

double EmpiricalDistribution::ecdf(double x) const {
  const auto it = std::upper_bound(samples_.begin(), samples_.end(), x);
  return static_cast<double>(it - samples_.begin()) / static_cast<double>(samples_.size());
}

Calibration calibrate(std::span<const double> small_one_way,
                      std::span<const double> large_one_way, std::uint64_t large_size,
                      double o_fraction) {
  if (small_one_way.empty() || large_one_way.empty()) {
    throw InvalidArgument("calibration needs non-empty small and large traces");
  }
  if (large_size <= 1) throw InvalidArgument("calibration size must exceed 1 byte");
  if (!(o_fraction >= 0.0 && o_fraction <= 1.0)) {
    throw InvalidArgument("o_fraction must lie in [0, 1]");
  }
  const double t_small = *std::min_element(small_one_way.begin(), small_one_way.end());
  const double t_large = *std::min_element(large_one_way.begin(), large_one_way.end());
  if (!(t_small > 0.0)) throw InvalidArgument("small-message times must be positive");

  Calibration cal;
  cal.o_fraction = o_fraction;
  const Nanos t1 = round_half_up(t_small);
  // Cap so that L = t1 - 2o never goes negative after rounding o up.
  cal.params.o = std::min(round_half_up(o_fraction * static_cast<double>(t1) / 2.0), t1 / 2);
  cal.params.L = t1 - 2 * cal.params.o;
  cal.params.g = cal.params.o;
  if (t_large < t_small) {
    cal.degenerate = true;
    cal.params.G = 0.0;
  } else {
    cal.params.G = (t_large - t_small) / static_cast<double>(large_size - 1);
  }
  return cal;
}

}  // namespace nsim
