#pragma once

#include <CLI11.hpp>
#include <filesystem>
#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "nsim/model.hpp"

namespace nsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitValidation = 3;
inline constexpr int kExitIo = 4;
inline constexpr int kExitDeadlock = 5;

/// Leaf subcommands register the work to run once parsing succeeded.
struct Registry {
  std::vector<std::pair<CLI::App*, std::function<void()>>> actions;

  void on(CLI::App* sub, std::function<void()> fn) { actions.emplace_back(sub, std::move(fn)); }
};

void register_bench(CLI::App& app, Registry& reg);
void register_trace(CLI::App& app, Registry& reg);
void register_gen(CLI::App& app, Registry& reg);
void register_sim(CLI::App& app, Registry& reg);
void register_cost(CLI::App& app, Registry& reg);
void register_report(CLI::App& app, Registry& reg);

/// Environment variable consulted for an option's long name:
/// "noise-lat" -> "NSIM_NOISE_LAT".
std::string env_name(std::string_view long_name);

/// `key = value` lines, optional `[sub.command]` sections, '#'/';' comments.
struct ConfigEntry {
  std::string section;
  std::string key;
  std::string value;
};
std::vector<ConfigEntry> read_config(const std::filesystem::path& path);

/// Extra arguments that supply env and config values for every option of
/// the selected command chain that the command line left unset.
std::vector<std::string> layered_arguments(const CLI::App& app,
                                           const std::vector<ConfigEntry>& config);

/// Whole file, or standard input for "-".
std::string read_text(const std::string& path);
/// Writes the whole buffer to `path`, or to standard output for "-".
void write_text(const std::string& path, std::string_view text);

std::string sha256_hex(std::string_view bytes);

LogGPParams params_from_json(const nlohmann::json& j);
nlohmann::json params_to_json(const LogGPParams& p);
LogGPParams load_params(const std::string& path);

/// Parses a JSON document, mapping syntax errors onto nsim::ParseError.
nlohmann::json parse_json(std::string_view text, const std::string& source);

/// Adds the shared `--out` option (default "-").
CLI::Option* add_out_option(CLI::App* sub, std::string& target);

}  // namespace nsim::cli
