#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nsim/model.hpp"
#include "nsim/simengine.hpp"

namespace nsim::cost {

enum class PriceLabel { committed, on_demand };

std::string_view to_string(PriceLabel label) noexcept;
PriceLabel label_from_string(std::string_view text);

struct PriceSpec {
  std::string provider;
  std::string instance;
  PriceLabel label = PriceLabel::on_demand;
  double usd_per_node_hour = 0.0;
};

inline constexpr double kNanosPerHour = 3.6e12;

/// runtime / 1 h * nodes * hourly price, unrounded.
double run_cost(Nanos runtime, std::uint64_t nodes, const PriceSpec& price);

/// noisy[i].completion / noiseless.completion - 1 for every run.
std::vector<double> relative_increase(std::span<const sim::SimResult> noisy,
                                      const sim::SimResult& noiseless);
double relative_increase(Nanos noisy, Nanos noiseless);

/// CSV `provider,instance,label,usd_per_hour` with '#' comments. Rows with
/// price "NA" are skipped (no public price).
std::vector<PriceSpec> read_price_catalog(std::istream& in, const std::string& source = "<stream>");
std::vector<PriceSpec> load_price_catalog(const std::filesystem::path& path);

/// First entry for provider and label, optionally restricted to an instance.
/// Provider and instance match case-insensitively.
const PriceSpec& find_price(const std::vector<PriceSpec>& catalog, std::string_view provider,
                            PriceLabel label, std::optional<std::string_view> instance = {});

}  // namespace nsim::cost
