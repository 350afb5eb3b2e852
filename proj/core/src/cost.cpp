#include "nsim/cost.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nsim/error.hpp"

namespace nsim::cost {
namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::string_view to_string(PriceLabel label) noexcept {
  return label == PriceLabel::committed ? "committed" : "on_demand";
}

PriceLabel label_from_string(std::string_view text) {
  if (text == "committed") return PriceLabel::committed;
  if (text == "on_demand") return PriceLabel::on_demand;
  throw InvalidArgument("unknown price label '" + std::string(text) + "'");
}

double run_cost(Nanos runtime, std::uint64_t nodes, const PriceSpec& price) {
  if (nodes < 1) throw InvalidArgument("node count must be at least 1");
  if (runtime < 0) throw InvalidArgument("runtime must be non-negative");
  if (!(price.usd_per_node_hour > 0.0)) throw InvalidArgument("hourly price must be positive");
  return static_cast<double>(runtime) / kNanosPerHour * static_cast<double>(nodes) *
         price.usd_per_node_hour;
}

double relative_increase(Nanos noisy, Nanos noiseless) {
  if (noiseless <= 0) throw InvalidArgument("noiseless completion must be positive");
  return static_cast<double>(noisy) / static_cast<double>(noiseless) - 1.0;
}

std::vector<double> relative_increase(std::span<const sim::SimResult> noisy,
                                      const sim::SimResult& noiseless) {
  if (noiseless.completion <= 0) throw InvalidArgument("noiseless completion must be positive");
  std::vector<double> out;
  out.reserve(noisy.size());
  for (const auto& r : noisy) out.push_back(relative_increase(r.completion, noiseless.completion));
  return out;
}

std::vector<PriceSpec> read_price_catalog(std::istream& in, const std::string& source) {
  std::vector<PriceSpec> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!header_seen) {
      if (text != "provider,instance,label,usd_per_hour") {
        throw ParseError("expected catalog header in " + source, line_no, 1);
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::string_view rest = text;
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(trim(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 4) throw ParseError("expected 4 fields in " + source, line_no, 1);
    if (fields[3] == "NA") continue;
    PriceSpec spec;
    spec.provider = std::string(fields[0]);
    spec.instance = std::string(fields[1]);
    try {
      spec.label = label_from_string(fields[2]);
    } catch (const InvalidArgument& e) {
      throw ParseError(e.what(), line_no, 1);
    }
    const auto [ptr, ec] =
        std::from_chars(fields[3].data(), fields[3].data() + fields[3].size(), spec.usd_per_node_hour);
    if (ec != std::errc{} || ptr != fields[3].data() + fields[3].size() ||
        !(spec.usd_per_node_hour > 0.0)) {
      throw ParseError("invalid hourly price '" + std::string(fields[3]) + "' in " + source,
                       line_no, 1);
    }
    out.push_back(std::move(spec));
  }
  if (!header_seen) throw ValidationError(source + ": price catalog is empty", {});
  return out;
}

std::vector<PriceSpec> load_price_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open price catalog " + path.string());
  return read_price_catalog(in, path.string());
}

const PriceSpec& find_price(const std::vector<PriceSpec>& catalog, std::string_view provider,
                            PriceLabel label, std::optional<std::string_view> instance) {
  for (const auto& spec : catalog) {
    if (spec.label != label || !iequals(spec.provider, provider)) continue;
    if (instance && !iequals(spec.instance, *instance)) continue;
    return spec;
  }
  throw InvalidArgument("no " + std::string(to_string(label)) + " price for provider '" +
                        std::string(provider) + "'" +
                        (instance ? " instance '" + std::string(*instance) + "'" : std::string()));
}

}  // namespace nsim::cost
