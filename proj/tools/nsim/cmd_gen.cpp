#include <chrono>
#include <sstream>

#include "cli_support.hpp"
#include "nsim/error.hpp"
#include "nsim/goal.hpp"

namespace nsim::cli {
namespace {

struct GenOptions {
  goal::Rank ranks = 0;
  std::uint64_t size = 0;
  std::uint64_t reduce_cost = 0;
  std::uint64_t compute_ns = 0;
  std::uint32_t matmul = 0;
  std::uint32_t iterations = 1;
  std::string pattern = "dissem";
  std::string format = "goal";
  std::string out = "-";
};

// Wall time of one naive n x n double matrix multiply on this host, best of
// three, as the calc cost of a compute phase.
std::uint64_t time_matmul(std::uint32_t n) {
  std::vector<double> a(std::size_t{n} * n, 1.0), b(a.size(), 0.5), c(a.size());
  std::uint64_t best = UINT64_MAX;
  for (int rep = 0; rep < 3; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t k = 0; k < n; ++k) {
        const double aik = a[std::size_t{i} * n + k];
        for (std::uint32_t j = 0; j < n; ++j) c[std::size_t{i} * n + j] += aik * b[std::size_t{k} * n + j];
      }
    }
    const auto ns = std::chrono::duration_cast<std::chrono::nanoseconds>(
                        std::chrono::steady_clock::now() - t0)
                        .count();
    best = std::min<std::uint64_t>(best, static_cast<std::uint64_t>(ns));
  }
  // Keep the result observable so the loops are not optimized away.
  volatile double sink = c[0];
  (void)sink;
  return std::max<std::uint64_t>(best, 1);
}

void emit(const goal::Schedule& s, const GenOptions& o) {
  if (o.format == "json") {
    write_text(o.out, goal::to_json(s, 2) + "\n");
  } else {
    std::ostringstream text;
    goal::emit_goal(s, text);
    write_text(o.out, text.str());
  }
}

CLI::App* common(CLI::App* gen, const char* name, const char* help, GenOptions& o) {
  auto* sub = gen->add_subcommand(name, help);
  sub->add_option("-p,--ranks", o.ranks, "Number of ranks P")->check(CLI::PositiveNumber);
  sub->add_option("-s,--size", o.size, "Message size in bytes")->check(CLI::PositiveNumber);
  sub->add_option("--format", o.format, "goal or json")
      ->check(CLI::IsMember({"goal", "json"}))
      ->capture_default_str();
  add_out_option(sub, o.out);
  return sub;
}

void require(const GenOptions& o) {
  if (o.ranks == 0) throw InvalidArgument("--ranks is required");
  if (o.size == 0) throw InvalidArgument("--size is required");
}

}  // namespace

void register_gen(CLI::App& app, Registry& reg) {
  auto* gen = app.add_subcommand("gen", "Generate collective schedules as GOAL text");
  gen->require_subcommand(1);
  auto o = std::make_shared<GenOptions>();

  auto* dissem = common(gen, "dissem", "Dissemination pattern, ceil(log2 P) rounds", *o);
  reg.on(dissem, [o] {
    require(*o);
    emit(goal::gen_dissemination(o->ranks, o->size), *o);
  });

  auto* ring = common(gen, "ring", "Ring allreduce: reduce-scatter then allgather", *o);
  ring->add_option("--reduce-cost", o->reduce_cost, "Calc ns per reduced chunk");
  reg.on(ring, [o] {
    require(*o);
    emit(goal::gen_ring_allreduce(o->ranks, o->size, o->reduce_cost), *o);
  });

  auto* comp = common(gen, "compapp", "Compute phases interleaved with a collective", *o);
  comp->add_option("--compute-ns", o->compute_ns, "Calc duration per iteration");
  comp->add_option("--matmul", o->matmul, "Time an N x N matmul here and use it as compute")
      ->check(CLI::PositiveNumber);
  comp->add_option("--pattern", o->pattern, "dissem or ring")->capture_default_str();
  comp->add_option("--iterations", o->iterations, "Compute/collective iterations")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  comp->add_option("--reduce-cost", o->reduce_cost, "Calc ns per reduced chunk (ring)");
  reg.on(comp, [o] {
    require(*o);
    if (o->matmul > 0 && o->compute_ns > 0) {
      throw InvalidArgument("--compute-ns and --matmul are mutually exclusive");
    }
    const auto compute = o->matmul > 0 ? time_matmul(o->matmul) : o->compute_ns;
    auto s = goal::gen_compute_collective(o->ranks, compute, goal::pattern_from_string(o->pattern),
                                          o->size, o->iterations, o->reduce_cost);
    if (o->matmul > 0) s.metadata["matmul_n"] = std::to_string(o->matmul);
    emit(s, *o);
  });
}

}  // namespace nsim::cli
