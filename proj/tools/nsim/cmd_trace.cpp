#include <numeric>
#include <sstream>

#include "cli_support.hpp"
#include "nsim/error.hpp"
#include "nsim/noise.hpp"
#include "nsim/report.hpp"

namespace nsim::cli {
namespace {

struct TraceOptions {
  std::string in = "-";
  std::string unit = "ns";
  std::string out = "-";
  std::string by = "min";
  double frac = 0.01;
  std::string side = "largest";
  std::uint64_t size = 0;
};

noise::SampleTrace load(const TraceOptions& o) {
  std::istringstream in(read_text(o.in));
  return noise::read_trace(in, unit_from_string(o.unit), o.in == "-" ? "<stdin>" : o.in);
}

void emit_trace(const TraceOptions& o, const noise::SampleTrace& t) {
  std::ostringstream out;
  noise::write_trace(out, t);
  write_text(o.out, out.str());
}

void dist(const TraceOptions& o) {
  const auto trace = load(o);
  const auto d = noise::build_distribution(trace);
  const auto values = d.samples();
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  nlohmann::json quantiles = nlohmann::json::object();
  for (const auto& [name, p] : std::initializer_list<std::pair<const char*, double>>{
           {"p01", 0.01}, {"p25", 0.25}, {"p50", 0.5}, {"p75", 0.75}, {"p99", 0.99},
           {"p999", 0.999}}) {
    quantiles[name] = report::quantile_sorted(values, p);
  }
  const nlohmann::json j{{"unit", to_string(d.unit())}, {"n", d.count()},      {"min", d.min()},
                         {"max", d.max()},              {"mean", mean},        {"quantiles", quantiles},
                         {"max_over_min", d.max() / d.min()}};
  write_text(o.out, j.dump(2) + "\n");
}

}  // namespace

void register_trace(CLI::App& app, Registry& reg) {
  auto* trace = app.add_subcommand("trace", "Inspect and transform measurement traces");
  trace->require_subcommand(1);
  auto o = std::make_shared<TraceOptions>();

  auto input = [&](CLI::App* sub) {
    sub->add_option("-i,--in", o->in, "Trace CSV, '-' for stdin")->capture_default_str();
    sub->add_option("--unit", o->unit, "ns, gbps, ns_per_byte or ratio")
        ->check(CLI::IsMember({"ns", "gbps", "ns_per_byte", "ratio"}))
        ->capture_default_str();
    add_out_option(sub, o->out);
  };

  auto* dist_cmd = trace->add_subcommand("dist", "Summarize the empirical distribution as JSON");
  input(dist_cmd);
  reg.on(dist_cmd, [o] { dist(*o); });

  auto* norm = trace->add_subcommand("normalize", "Divide by the minimum or maximum sample");
  input(norm);
  norm->add_option("--by", o->by, "min or max")
      ->check(CLI::IsMember({"min", "max"}))
      ->capture_default_str();
  reg.on(norm, [o] {
    const auto t = load(*o);
    emit_trace(*o, o->by == "max" ? noise::normalize_max(t) : noise::normalize_min(t));
  });

  auto* top = trace->add_subcommand("top", "Keep the most extreme fraction of samples");
  input(top);
  top->add_option("--frac", o->frac, "Fraction in (0, 1]")->capture_default_str();
  top->add_option("--side", o->side, "largest or smallest")
      ->check(CLI::IsMember({"largest", "smallest"}))
      ->capture_default_str();
  reg.on(top, [o] {
    const auto side = o->side == "smallest" ? noise::Side::smallest : noise::Side::largest;
    emit_trace(*o, noise::top_fraction(load(*o), o->frac, side));
  });

  auto* bw = trace->add_subcommand("bandwidth", "Convert one-way times (ns) of SIZE-byte messages to gbps");
  input(bw);
  bw->add_option("--size", o->size, "Message size in bytes")->check(CLI::PositiveNumber);
  reg.on(bw, [o] {
    if (o->size == 0) throw InvalidArgument("--size is required");
    if (o->unit != "ns") throw InvalidArgument("bandwidth conversion needs a trace in ns");
    auto t = load(*o);
    for (auto& row : t.rows) row.value = noise::bandwidth_from_rtt(o->size, row.value);
    t.unit = Unit::gigabits_per_second;
    emit_trace(*o, t);
  });
}

}  // namespace nsim::cli
