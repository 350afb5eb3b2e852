#include "cli_support.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <set>
#include <sstream>

#include "nsim/error.hpp"

namespace nsim::cli {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool truthy(std::string_view v) {
  std::string lower(v);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return lower == "1" || lower == "true" || lower == "yes" || lower == "on";
}

// "sim.run" for the chain root -> sim -> run.
std::string command_path(const std::vector<const CLI::App*>& chain) {
  std::string path;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    if (!path.empty()) path += '.';
    path += chain[i]->get_name();
  }
  return path;
}

bool section_applies(std::string_view section, std::string_view path) {
  if (section.empty() || section == path) return true;
  return path.size() > section.size() && path.substr(0, section.size()) == section &&
         path[section.size()] == '.';
}

}  // namespace

std::string env_name(std::string_view long_name) {
  std::string out = "NSIM_";
  for (char c : long_name) {
    out += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<ConfigEntry> read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::vector<ConfigEntry> out;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#' || text.front() == ';') continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError("unterminated section header", line_no, 1);
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no, 1);
    auto key = trim(std::string_view(text).substr(0, eq));
    auto value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw ParseError("empty key", line_no, 1);
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    }
    std::replace(key.begin(), key.end(), '_', '-');
    out.push_back({section, key, value});
  }
  return out;
}

std::vector<std::string> layered_arguments(const CLI::App& app,
                                           const std::vector<ConfigEntry>& config) {
  std::vector<const CLI::App*> chain{&app};
  for (;;) {
    const auto subs = chain.back()->get_subcommands();
    if (subs.empty()) break;
    chain.push_back(subs.front());
  }
  const auto path = command_path(chain);

  std::vector<std::string> extra;
  std::set<std::string> seen;
  // Leaf options shadow same-named options of enclosing commands.
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    for (const CLI::Option* opt : (*it)->get_options()) {
      const auto& names = opt->get_lnames();
      if (names.empty()) continue;
      const auto& name = names.front();
      if (name == "help" || name == "config" || !seen.insert(name).second) continue;
      if (opt->count() > 0) continue;

      std::optional<std::string> value;
      if (const char* env = std::getenv(env_name(name).c_str()); env != nullptr) {
        value = env;
      } else {
        // Later entries win, so a section can override a global default.
        for (const auto& entry : config) {
          if (entry.key == name && section_applies(entry.section, path)) value = entry.value;
        }
      }
      if (!value) continue;
      if (opt->get_expected_min() == 0) {
        if (truthy(*value)) extra.push_back("--" + name);
      } else {
        extra.push_back("--" + name + "=" + *value);
      }
    }
  }
  return extra;
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path);
  return buffer.str();
}

void write_text(const std::string& path, std::string_view text) {
  if (path == "-") {
    std::cout.write(text.data(), static_cast<std::streamsize>(text.size()));
    std::cout.flush();
    if (!std::cout) throw IoError("failed writing to standard output");
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out.flush()) throw IoError("failed writing " + path);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

nlohmann::json parse_json(std::string_view text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Recover a line/column from the byte offset for the error report.
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(source + ": invalid JSON", line, column);
  }
}

LogGPParams params_from_json(const nlohmann::json& j) {
  try {
    LogGPParams p;
    p.L = j.at("L").get<Nanos>();
    p.o = j.at("o").get<Nanos>();
    p.g = j.at("g").get<Nanos>();
    p.G = j.at("G").get<double>();
    p.validate();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("LogGP parameters need integer L, o, g (ns) and real G (ns/B)",
                          {e.what()});
  }
}

nlohmann::json params_to_json(const LogGPParams& p) {
  return {{"L", p.L}, {"o", p.o}, {"g", p.g}, {"G", p.G}};
}

LogGPParams load_params(const std::string& path) {
  return params_from_json(parse_json(read_text(path), path));
}

CLI::Option* add_out_option(CLI::App* sub, std::string& target) {
  return sub->add_option("-o,--out", target, "Output file, '-' for standard output")
      ->capture_default_str();
}

}  // namespace nsim::cli
