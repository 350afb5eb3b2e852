#include <iostream>
#include <sstream>

#include "cli_support.hpp"
#include "nsim/error.hpp"
#include "nsim/goal.hpp"
#include "nsim/noise.hpp"
#include "nsim/simengine.hpp"

namespace nsim::cli {
namespace {

inline constexpr std::string_view kResultSchema = "nsim.simresult/1";

struct SimOptions {
  std::string goal = "-";
  std::string params;
  std::string noise_lat;
  std::string noise_bw;
  std::string noise_os;
  std::uint64_t seed = 0;
  std::size_t reps = 1;
  unsigned workers = 0;
  bool per_rank = false;
  std::string out = "-";
};

struct CalibrateOptions {
  std::string small;
  std::string large;
  std::uint64_t size = 0;
  double o_fraction = 0.5;
  std::string out = "-";
};

struct LoadedTrace {
  noise::SampleTrace trace;
  nlohmann::json meta;
};

LoadedTrace load_noise(const std::string& path, Unit unit) {
  const auto bytes = read_text(path);
  std::istringstream in(bytes);
  LoadedTrace t{noise::read_trace(in, unit, path), {}};
  t.meta = {{"sha256", sha256_hex(bytes)}, {"samples", t.trace.size()}, {"unit", to_string(unit)}};
  return t;
}

// GOAL text or the JSON export, told apart by the first non-blank character.
goal::Schedule load_schedule(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return goal::schedule_from_json(text);
  return goal::parse_goal(text);
}

void run(const SimOptions& o) {
  if (o.params.empty()) throw InvalidArgument("--params is required");
  if (o.reps < 1) throw InvalidArgument("--reps must be at least 1");
  const auto goal_text = read_text(o.goal);
  const auto schedule = load_schedule(goal_text);

  sim::SimConfig cfg;
  cfg.params = load_params(o.params);
  cfg.seed = o.seed;
  nlohmann::json noise_meta = nlohmann::json::object();
  if (!o.noise_lat.empty()) {
    auto t = load_noise(o.noise_lat, Unit::nanoseconds);
    cfg.noise.latency = noise::build_distribution(t.trace);
    noise_meta["latency"] = std::move(t.meta);
  }
  if (!o.noise_bw.empty()) {
    auto t = load_noise(o.noise_bw, Unit::gigabits_per_second);
    cfg.noise.bandwidth = noise::build_distribution(t.trace);
    noise_meta["bandwidth"] = std::move(t.meta);
  }
  if (!o.noise_os.empty()) {
    auto t = load_noise(o.noise_os, Unit::nanoseconds);
    cfg.noise.os = noise::to_detour_trace(t.trace);
    noise_meta["os"] = std::move(t.meta);
  }

  sim::SimConfig baseline_cfg;
  baseline_cfg.params = cfg.params;
  const auto compiled = sim::CompiledSchedule(schedule);
  const auto baseline = sim::simulate(compiled, baseline_cfg);
  const auto results = sim::run_many(schedule, cfg, o.reps, o.workers);

  nlohmann::json schedule_meta{{"nranks", schedule.nranks},
                               {"ops", schedule.op_count()},
                               {"sha256", sha256_hex(goal_text)}};
  if (!schedule.metadata.empty()) schedule_meta["metadata"] = schedule.metadata;

  nlohmann::json doc;
  doc["schema"] = kResultSchema;
  doc["metadata"] = {{"generator", std::string("nsim ") + NSIM_VERSION},
                     {"schedule", std::move(schedule_meta)},
                     {"params", params_to_json(cfg.params)},
                     {"noise", std::move(noise_meta)},
                     {"seed", o.seed},
                     {"prng", sim::kPrngName},
                     {"reps", o.reps}};
  doc["noiseless_completion_ns"] = baseline.completion;
  auto& runs = doc["runs"] = nlohmann::json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    nlohmann::json r{{"run", i}, {"completion_ns", results[i].completion}};
    if (o.per_rank) r["per_rank"] = results[i].per_rank_completion;
    runs.push_back(std::move(r));
  }
  write_text(o.out, doc.dump(1) + "\n");
}

void calibrate(const CalibrateOptions& o) {
  if (o.small.empty() || o.large.empty()) throw InvalidArgument("--small and --large are required");
  if (o.size < 2) throw InvalidArgument("--size must be at least 2 bytes");
  auto load = [](const std::string& path) {
    std::istringstream in(read_text(path));
    return noise::read_trace(in, Unit::nanoseconds, path);
  };
  const auto small = load(o.small);
  const auto large = load(o.large);
  const auto c = noise::calibrate(small, large, o.size, o.o_fraction);
  if (c.degenerate) {
    std::cerr << "nsim: warning: large-message minimum is below the small-message minimum; "
                 "G set to 0\n";
  }
  auto j = params_to_json(c.params);
  j["o_fraction"] = c.o_fraction;
  j["degenerate"] = c.degenerate;
  j["large_size"] = o.size;
  write_text(o.out, j.dump(2) + "\n");
}

}  // namespace

void register_sim(CLI::App& app, Registry& reg) {
  auto* sim = app.add_subcommand("sim", "Simulate schedules under the LogGP model with noise");
  sim->require_subcommand(1);

  auto o = std::make_shared<SimOptions>();
  auto* run_cmd = sim->add_subcommand("run", "Simulate a schedule --reps times; writes result JSON");
  run_cmd->add_option("--goal", o->goal, "GOAL text or schedule JSON, '-' for stdin")
      ->capture_default_str();
  run_cmd->add_option("--params", o->params, "LogGP parameters JSON {L, o, g, G}");
  run_cmd->add_option("--noise-lat", o->noise_lat, "One-way latency trace CSV (ns)");
  run_cmd->add_option("--noise-bw", o->noise_bw, "Bandwidth trace CSV (gbps)");
  run_cmd->add_option("--noise-os", o->noise_os, "OS detour trace CSV (ns)");
  run_cmd->add_option("--seed", o->seed, "Base seed; run i uses a derived stream")
      ->capture_default_str();
  run_cmd->add_option("--reps", o->reps, "Number of independent runs")->capture_default_str();
  run_cmd->add_option("--workers", o->workers, "Worker threads, 0 = all cores")
      ->capture_default_str();
  run_cmd->add_flag("--per-rank", o->per_rank, "Include per-rank completion times");
  add_out_option(run_cmd, o->out);
  reg.on(run_cmd, [o] { run(*o); });

  auto c = std::make_shared<CalibrateOptions>();
  auto* cal = sim->add_subcommand("calibrate", "Fit LogGP parameters from ping-pong traces");
  cal->add_option("--small", c->small, "One-way trace of the smallest message size (ns)");
  cal->add_option("--large", c->large, "One-way trace of the large message size (ns)");
  cal->add_option("--size", c->size, "Large message size in bytes");
  cal->add_option("--o-fraction", c->o_fraction, "Share of the base time attributed to 2o")
      ->capture_default_str();
  add_out_option(cal, c->out);
  reg.on(cal, [c] { calibrate(*c); });
}

}  // namespace nsim::cli
