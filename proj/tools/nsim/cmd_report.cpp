#include <filesystem>
#include <sstream>

#include "cli_support.hpp"
#include "nsim/error.hpp"
#include "nsim/noise.hpp"
#include "nsim/report.hpp"

namespace nsim::cli {
namespace {

struct ReportOptions {
  std::vector<std::string> inputs;
  std::string format = "csv";
  bool raw = false;
  bool log2 = false;
  std::string title;
  std::string y_label = "completion time [ns]";
  int width = 640;
  int height = 400;
  std::string out = "-";
};

// Unit column of the first data row; traces may hold any unit.
Unit sniff_unit(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) break;
    auto unit = line.substr(comma + 1);
    if (!unit.empty() && unit.back() == '\r') unit.pop_back();
    return unit_from_string(unit);
  }
  return Unit::nanoseconds;
}

// LABEL=PATH, or PATH labelled by its file stem.
std::pair<std::string, std::string> split_input(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq != std::string::npos) return {spec.substr(0, eq), spec.substr(eq + 1)};
  return {std::filesystem::path(spec).stem().string(), spec};
}

std::vector<report::GroupStats> load_groups(const ReportOptions& o) {
  if (o.inputs.empty()) throw InvalidArgument("at least one input is required");
  std::vector<report::GroupStats> out;
  for (const auto& spec : o.inputs) {
    const auto [label, path] = split_input(spec);
    const auto text = read_text(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
      const auto doc = parse_json(text, path);
      if (doc.contains("schema") && doc["schema"] == report::kJsonSchema) {
        std::istringstream in(text);
        for (auto& g : report::read_json(in)) out.push_back(std::move(g));
        continue;
      }
      std::vector<double> samples;
      try {
        for (const auto& run : doc.at("runs")) samples.push_back(run.at("completion_ns").get<double>());
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path + " is neither a result nor a box statistics document", {e.what()});
      }
      out.push_back({label, report::box_stats(samples), o.raw ? samples : std::vector<double>{}});
      continue;
    }
    std::istringstream in(text);
    const auto trace = noise::read_trace(in, sniff_unit(text), path);
    const auto samples = trace.values();
    out.push_back({label, report::box_stats(samples), o.raw ? samples : std::vector<double>{}});
  }
  return out;
}

void add_inputs(CLI::App* sub, ReportOptions& o) {
  sub->add_option("inputs", o.inputs,
                  "Result JSON, box statistics JSON or trace CSV; LABEL=PATH names the group");
  add_out_option(sub, o.out);
}

}  // namespace

void register_report(CLI::App& app, Registry& reg) {
  auto* report = app.add_subcommand("report", "Boxplot statistics and figures");
  report->require_subcommand(1);
  auto o = std::make_shared<ReportOptions>();

  auto* box = report->add_subcommand("box", "Quartiles, whiskers, notches and outliers per group");
  add_inputs(box, *o);
  box->add_option("--format", o->format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  box->add_flag("--raw", o->raw, "Include the raw samples");
  reg.on(box, [o] {
    report::emit(load_groups(*o), report::format_from_string(o->format), o->out);
  });

  auto* svg = report->add_subcommand("svg", "Self-contained SVG boxplot, one box per group");
  add_inputs(svg, *o);
  svg->add_flag("--log2", o->log2, "Log-2 value axis");
  svg->add_option("--title", o->title, "Figure title");
  svg->add_option("--y-label", o->y_label, "Value axis label")->capture_default_str();
  svg->add_option("--width", o->width, "Width in px")->capture_default_str();
  svg->add_option("--height", o->height, "Height in px")->capture_default_str();
  reg.on(svg, [o] {
    report::SvgOptions opts;
    opts.title = o->title;
    opts.y_label = o->y_label;
    opts.scale = o->log2 ? report::Scale::log2 : report::Scale::linear;
    opts.width = o->width;
    opts.height = o->height;
    report::emit(load_groups(*o), report::Format::svg, o->out, opts);
  });
}

}  // namespace nsim::cli
