#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "nsim/goal.hpp"
#include "nsim/simengine.hpp"
#include "process.hpp"
#include "stats.hpp"

namespace nsim::testing {
namespace {

using nlohmann::json;

ProcessResult nsim(std::vector<std::string> args, const std::string& input = {},
                   const std::vector<std::string>& env = {}) {
  args.insert(args.begin(), cli_path());
  return run_process(args, input, env);
}

std::string write_file(const std::string& stem, const std::string& content) {
  const auto path = temp_path(stem);
  std::ofstream(path) << content;
  return path;
}

std::string params_file() {
  return write_file("params.json", R"({"L": 2000, "o": 300, "g": 300, "G": 0.08})");
}

TEST(Cli, VersionAndHelp) {
  const auto v = nsim({"--version"});
  EXPECT_EQ(v.exit_code, 0);
  EXPECT_NE(v.out.find("0.3.0"), std::string::npos);
  EXPECT_EQ(nsim({"--help"}).exit_code, 0);
}

TEST(Cli, UsageErrorsExitWithTwo) {
  EXPECT_EQ(nsim({}).exit_code, 2);
  EXPECT_EQ(nsim({"gen", "dissem", "--bogus"}).exit_code, 2);
  EXPECT_EQ(nsim({"gen", "dissem", "-p", "abc"}).exit_code, 2);
}

TEST(Cli, GenEmitsParseableGoal) {
  const auto r = nsim({"gen", "dissem", "-p", "8", "-s", "16"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(goal::parse_goal(r.out), goal::gen_dissemination(8, 16));
  const auto j = nsim({"gen", "ring", "-p", "4", "-s", "4096", "--format", "json"});
  ASSERT_EQ(j.exit_code, 0) << j.err;
  EXPECT_EQ(goal::schedule_from_json(j.out), goal::gen_ring_allreduce(4, 4096, 0));
}

TEST(Cli, SimRunMatchesTheLibrary) {
  const auto goal_text = nsim({"gen", "dissem", "-p", "16", "-s", "16"}).out;
  const auto r = nsim({"sim", "run", "--params", params_file(), "--reps", "3", "--per-rank"}, goal_text);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("schema"), "nsim.simresult/1");
  sim::SimConfig cfg;
  cfg.params = {2000, 300, 300, 0.08};
  const auto expected = sim::simulate(goal::gen_dissemination(16, 16), cfg).completion;
  EXPECT_EQ(doc.at("noiseless_completion_ns").get<Nanos>(), expected);
  ASSERT_EQ(doc.at("runs").size(), 3u);
  for (const auto& run : doc.at("runs")) {
    EXPECT_EQ(run.at("completion_ns").get<Nanos>(), expected);
    EXPECT_EQ(run.at("per_rank").size(), 16u);
  }
  EXPECT_EQ(doc.at("metadata").at("prng"), std::string(sim::kPrngName));
}

TEST(Cli, SimRunWithNoiseRecordsTraceDigests) {
  const auto goal_text = nsim({"gen", "dissem", "-p", "8", "-s", "16"}).out;
  // Noiseless one-way time equals the fast sample, so noise can only slow runs.
  const auto params = write_file("params_1190.json", R"({"L": 590, "o": 300, "g": 300, "G": 0})");
  const auto r = nsim({"sim", "run", "--params", params, "--reps", "20", "--seed", "3",
                       "--noise-lat", fixture_path("latency_twopoint.csv")},
                      goal_text);
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto doc = json::parse(r.out);
  const auto& lat = doc.at("metadata").at("noise").at("latency");
  EXPECT_EQ(lat.at("samples"), 100);
  EXPECT_EQ(lat.at("sha256").get<std::string>().size(), 64u);
  for (const auto& run : doc.at("runs")) {
    EXPECT_GE(run.at("completion_ns").get<Nanos>(), doc.at("noiseless_completion_ns").get<Nanos>());
  }
}

TEST(Cli, SyntaxErrorIsReportedWithPosition) {
  const auto r = nsim({"--error-json", "sim", "run", "--params", params_file()},
                      "num_ranks 2\nrank 0 { l1: sned 1b to 1 }\n");
  EXPECT_EQ(r.exit_code, 3);
  const auto err = json::parse(r.err).at("error");
  EXPECT_EQ(err.at("kind"), "parse");
  EXPECT_EQ(err.at("line"), 2);
  EXPECT_EQ(err.at("exit_code"), 3);
}

TEST(Cli, ValidationErrorListsViolations) {
  const auto r = nsim({"--error-json", "sim", "run", "--params", params_file()},
                      "num_ranks 2\nrank 0 { a: send 1b to 1\n b: send 2b to 1 }\n");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(json::parse(r.err).at("error").at("violations").size(), 2u);
}

TEST(Cli, DeadlockExitsWithFive) {
  const auto r = nsim({"--error-json", "sim", "run", "--params", params_file()},
                      "num_ranks 2\nrank 0 { a: recv 1b from 1\n b: send 1b to 1\n b requires a }\n"
                      "rank 1 { a: recv 1b from 0\n b: send 1b to 0\n b requires a }\n");
  EXPECT_EQ(r.exit_code, 5);
  EXPECT_EQ(json::parse(r.err).at("error").at("blocked_ops").size(), 4u);
}

TEST(Cli, MissingFileExitsWithFour) {
  const auto r = nsim({"sim", "run", "--params", "/nonexistent/params.json"}, "num_ranks 1\n");
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, FlagsBeatEnvironmentBeatConfig) {
  const auto goal_path = write_file("prec.goal", nsim({"gen", "dissem", "-p", "2", "-s", "1"}).out);
  const auto config = write_file("prec.ini", "[sim.run]\nseed = 5\nparams = " + params_file() + "\ngoal = " + goal_path + "\n");
  const auto seed_of = [](const ProcessResult& r) {
    EXPECT_EQ(r.exit_code, 0) << r.err;
    return json::parse(r.out).at("metadata").at("seed").get<int>();
  };
  EXPECT_EQ(seed_of(nsim({"--config", config, "sim", "run"})), 5);
  EXPECT_EQ(seed_of(nsim({"--config", config, "sim", "run"}, {}, {"NSIM_SEED=7"})), 7);
  EXPECT_EQ(seed_of(nsim({"--config", config, "sim", "run", "--seed", "9"}, {}, {"NSIM_SEED=7"})), 9);
}

TEST(Cli, CostOfSimulatedRuns) {
  const auto goal_text = nsim({"gen", "ring", "-p", "4", "-s", "1048576"}).out;
  const auto results = temp_path("cost_results.json");
  ASSERT_EQ(nsim({"sim", "run", "--params", params_file(), "--reps", "4", "--out", results}, goal_text).exit_code, 0);
  const auto r = nsim({"cost", "--results", results, "--price-catalog", std::string(NSIM_DATA_DIR) + "/prices.csv",
                       "--provider", "aws", "--instance", "c5n.metal"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("nodes"), 4);
  const double ns = doc.at("noiseless").at("completion_ns").get<double>();
  EXPECT_NEAR(doc.at("noiseless").at("usd").get<double>(), ns / 3.6e12 * 4 * 3.88, 1e-15);
  EXPECT_EQ(doc.at("summary").at("mean_relative_increase").get<double>(), 0.0);
  const auto bad = nsim({"cost", "--results", results, "--price-catalog",
                         std::string(NSIM_DATA_DIR) + "/prices.csv", "--provider", "nobody"});
  EXPECT_EQ(bad.exit_code, 3);
}

TEST(Cli, ReportBoxAndSvgFromResults) {
  const auto goal_text = nsim({"gen", "dissem", "-p", "8", "-s", "16"}).out;
  const auto results = temp_path("report_results.json");
  ASSERT_EQ(nsim({"sim", "run", "--params", params_file(), "--reps", "50", "--noise-lat",
                  fixture_path("latency_twopoint.csv"), "--out", results},
                 goal_text).exit_code, 0);
  const auto box = nsim({"report", "box", "P8=" + results, "--format", "json"});
  ASSERT_EQ(box.exit_code, 0) << box.err;
  const auto doc = json::parse(box.out);
  EXPECT_EQ(doc.at("groups")[0].at("label"), "P8");
  EXPECT_EQ(doc.at("groups")[0].at("stats").at("n"), 50);
  const auto svg = nsim({"report", "svg", results, "--log2", "--title", "dissemination"});
  ASSERT_EQ(svg.exit_code, 0) << svg.err;
  EXPECT_EQ(svg.out.rfind("<svg", 0), 0u);
}

TEST(Cli, TraceTools) {
  const auto dist = nsim({"trace", "dist", "-i", fixture_path("latency_twopoint.csv")});
  ASSERT_EQ(dist.exit_code, 0) << dist.err;
  const auto d = json::parse(dist.out);
  EXPECT_EQ(d.at("n"), 100);
  EXPECT_EQ(d.at("min"), 1190.0);
  EXPECT_EQ(d.at("max"), 11900.0);
  const auto top = nsim({"trace", "top", "-i", fixture_path("latency_twopoint.csv"), "--frac", "0.01"});
  ASSERT_EQ(top.exit_code, 0) << top.err;
  EXPECT_NE(top.out.find(",11900,ns"), std::string::npos) << top.out;
  const auto norm = nsim({"trace", "normalize", "-i", "-", "--by", "min"},
                         "timestamp_ns,value,unit\n0,4,ns\n1,2,ns\n");
  ASSERT_EQ(norm.exit_code, 0) << norm.err;
  EXPECT_NE(norm.out.find("0,2,ratio\n1,1,ratio"), std::string::npos) << norm.out;
}

TEST(Cli, CalibrateFromTraces) {
  const auto small = write_file("small.csv", "timestamp_ns,value,unit\n0,1300,ns\n1,1190,ns\n");
  const auto large = write_file("large.csv", "timestamp_ns,value,unit\n0,1398000,ns\n");
  const auto r = nsim({"sim", "calibrate", "--small", small, "--large", large, "--size", "16777216"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("o"), 298);
  EXPECT_EQ(doc.at("L"), 594);
  EXPECT_EQ(doc.at("degenerate"), false);
}

TEST(Cli, PingpongOverLoopback) {
  const auto r = nsim({"bench", "pingpong", "--loopback", "-s", "64", "-n", "50"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("timestamp_ns,value,unit\n", 0), 0u);
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 51);
}

TEST(Cli, PingpongBetweenTwoProcesses) {
  ChildProcess responder({cli_path(), "bench", "pingpong", "--listen", "0"});
  const auto line = responder.read_line();
  ASSERT_EQ(line.rfind("listening ", 0), 0u) << line;
  const auto peer = line.substr(std::string("listening ").size());
  const auto r = nsim({"bench", "pingpong", "--peer", peer, "-s", "1024", "-n", "20", "-c", "2"});
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 21);
  EXPECT_EQ(responder.wait(), 0);
}

}  // namespace
}  // namespace nsim::testing
