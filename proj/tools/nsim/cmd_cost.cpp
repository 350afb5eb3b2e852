#include "cli_support.hpp"
#include "nsim/cost.hpp"
#include "nsim/error.hpp"

namespace nsim::cli {
namespace {

struct CostOptions {
  std::string results;
  std::string catalog;
  std::string provider;
  std::string label = "on_demand";
  std::string instance;
  std::string baseline;
  std::uint64_t nodes = 0;
  std::string out = "-";
};

struct Results {
  std::vector<Nanos> completions;
  Nanos noiseless = 0;
  std::uint64_t nranks = 0;
};

Results load_results(const std::string& path) {
  const auto doc = parse_json(read_text(path), path);
  try {
    Results r;
    for (const auto& run : doc.at("runs")) r.completions.push_back(run.at("completion_ns").get<Nanos>());
    r.noiseless = doc.at("noiseless_completion_ns").get<Nanos>();
    r.nranks = doc.at("metadata").at("schedule").at("nranks").get<std::uint64_t>();
    if (r.completions.empty()) throw ValidationError(path + ": no runs", {});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + " is not a simulation result document", {e.what()});
  }
}

double mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

void run(const CostOptions& o) {
  if (o.results.empty() || o.catalog.empty() || o.provider.empty()) {
    throw InvalidArgument("--results, --price-catalog and --provider are required");
  }
  const auto results = load_results(o.results);
  const auto catalog = cost::load_price_catalog(o.catalog);
  const auto& price =
      cost::find_price(catalog, o.provider, cost::label_from_string(o.label),
                       o.instance.empty() ? std::nullopt : std::optional<std::string_view>(o.instance));
  const auto nodes = o.nodes > 0 ? o.nodes : results.nranks;

  nlohmann::json runs = nlohmann::json::array();
  std::vector<double> usd;
  std::vector<double> increase;
  for (std::size_t i = 0; i < results.completions.size(); ++i) {
    const auto t = results.completions[i];
    usd.push_back(cost::run_cost(t, nodes, price));
    increase.push_back(cost::relative_increase(t, results.noiseless));
    runs.push_back({{"run", i}, {"completion_ns", t}, {"usd", usd.back()},
                    {"relative_increase", increase.back()}});
  }

  nlohmann::json doc{
      {"price",
       {{"provider", price.provider},
        {"instance", price.instance},
        {"label", cost::to_string(price.label)},
        {"usd_per_node_hour", price.usd_per_node_hour}}},
      {"nodes", nodes},
      {"noiseless", {{"completion_ns", results.noiseless},
                     {"usd", cost::run_cost(results.noiseless, nodes, price)}}},
      {"summary",
       {{"mean_usd", mean(usd)},
        {"mean_relative_increase", mean(increase)},
        {"max_relative_increase", *std::max_element(increase.begin(), increase.end())}}},
      {"runs", std::move(runs)}};

  if (!o.baseline.empty()) {
    // Same price applied to another result set, e.g. a noiseless or
    // differently-provisioned sweep point.
    const auto base = load_results(o.baseline);
    std::vector<double> base_usd;
    for (auto t : base.completions) base_usd.push_back(cost::run_cost(t, nodes, price));
    const double base_mean = mean(base_usd);
    doc["baseline"] = {{"file_runs", base.completions.size()},
                       {"mean_usd", base_mean},
                       {"relative_increase", mean(usd) / base_mean - 1.0}};
  }
  write_text(o.out, doc.dump(2) + "\n");
}

}  // namespace

void register_cost(CLI::App& app, Registry& reg) {
  auto o = std::make_shared<CostOptions>();
  auto* sub = app.add_subcommand("cost", "Monetary cost of simulated runs");
  sub->add_option("--results", o->results, "Result JSON from 'sim run'");
  sub->add_option("--price-catalog", o->catalog, "CSV provider,instance,label,usd_per_hour");
  sub->add_option("--provider", o->provider, "Provider name in the catalog");
  sub->add_option("--label", o->label, "committed or on_demand")
      ->check(CLI::IsMember({"committed", "on_demand"}))
      ->capture_default_str();
  sub->add_option("--instance", o->instance, "Instance type; first match when omitted");
  sub->add_option("--nodes", o->nodes, "Node count; defaults to the schedule's rank count");
  sub->add_option("--baseline", o->baseline, "Second result JSON to compare mean cost against");
  add_out_option(sub, o->out);
  reg.on(sub, [o] { run(*o); });
}

}  // namespace nsim::cli
