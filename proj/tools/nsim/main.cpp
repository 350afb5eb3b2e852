#include <cstdlib>
#include <cstring>
#include <iostream>
#include <optional>

#include "cli_support.hpp"
#include "nsim/error.hpp"

namespace {

using nsim::cli::Registry;

int exit_code_for(nsim::ErrorCode code) {
  switch (code) {
    case nsim::ErrorCode::invalid_argument:
    case nsim::ErrorCode::parse:
    case nsim::ErrorCode::validation: return nsim::cli::kExitValidation;
    case nsim::ErrorCode::io: return nsim::cli::kExitIo;
    case nsim::ErrorCode::deadlock: return nsim::cli::kExitDeadlock;
  }
  return nsim::cli::kExitFailure;
}

int fail(bool as_json, int exit_code, std::string_view kind, const std::string& message,
         const nlohmann::json& details = nlohmann::json::object()) {
  if (as_json) {
    nlohmann::json j{{"error", {{"kind", kind}, {"exit_code", exit_code}, {"message", message}}}};
    for (const auto& [k, v] : details.items()) j["error"][k] = v;
    std::cerr << j.dump() << '\n';
  } else {
    std::cerr << "nsim: " << message << '\n';
  }
  return exit_code;
}

int report(bool as_json, const nsim::Error& e) {
  nlohmann::json details = nlohmann::json::object();
  if (const auto* p = dynamic_cast<const nsim::ParseError*>(&e)) {
    details["line"] = p->line();
    details["column"] = p->column();
  } else if (const auto* v = dynamic_cast<const nsim::ValidationError*>(&e)) {
    details["violations"] = v->violations();
  } else if (const auto* d = dynamic_cast<const nsim::DeadlockError*>(&e)) {
    details["blocked_ops"] = d->blocked_ops();
  }
  return fail(as_json, exit_code_for(e.code()), nsim::to_string(e.code()), e.what(), details);
}

std::vector<std::string> reversed(std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  bool error_json = false;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--error-json") == 0) error_json = true;
  }
  if (const char* env = std::getenv("NSIM_ERROR_JSON"); env && *env && std::strcmp(env, "0")) {
    error_json = true;
  }

  CLI::App app{"Network-noise-aware LogGP simulator and measurement toolkit", "nsim"};
  app.set_version_flag("--version", NSIM_VERSION);
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  app.add_flag("--error-json", error_json, "Print errors as a JSON object on stderr");
  app.add_option("--config", config_path, "INI-style defaults; flags and NSIM_* env vars win");

  Registry registry;
  nsim::cli::register_bench(app, registry);
  nsim::cli::register_trace(app, registry);
  nsim::cli::register_gen(app, registry);
  nsim::cli::register_sim(app, registry);
  nsim::cli::register_cost(app, registry);
  nsim::cli::register_report(app, registry);

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    try {
      app.parse(reversed(args));
      if (config_path.empty()) {
        if (const char* env = std::getenv("NSIM_CONFIG")) config_path = env;
      }
      std::vector<nsim::cli::ConfigEntry> config;
      if (!config_path.empty()) config = nsim::cli::read_config(config_path);
      auto extra = nsim::cli::layered_arguments(app, config);
      if (!extra.empty()) {
        args.insert(args.end(), extra.begin(), extra.end());
        app.parse(reversed(args));
      }
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) return app.exit(e);
      return fail(error_json, nsim::cli::kExitUsage, "usage", e.what());
    }

    for (auto& [sub, action] : registry.actions) {
      if (sub->parsed()) {
        action();
        return nsim::cli::kExitOk;
      }
    }
    return fail(error_json, nsim::cli::kExitUsage, "usage", "missing subcommand; see --help");
  } catch (const nsim::Error& e) {
    return report(error_json, e);
  } catch (const std::exception& e) {
    return fail(error_json, nsim::cli::kExitFailure, "internal", e.what());
  }
}
