#include <algorithm>

#include "nsim/error.hpp"
#include "nsim/goal.hpp"

namespace nsim::goal {
namespace {

using EntryDeps = std::vector<std::vector<OpId>>;

// Ops of rank `r` in [first, end) that no other op in that range depends on.
std::vector<OpId> terminal_ops(const Schedule& s, Rank r, OpId first) {
  const auto& ops = s.ranks[r];
  std::vector<bool> has_dependent(ops.size(), false);
  for (std::size_t i = first; i < ops.size(); ++i) {
    for (OpId d : ops[i].deps) has_dependent[d] = true;
  }
  std::vector<OpId> out;
  for (std::size_t i = first; i < ops.size(); ++i) {
    if (!has_dependent[i]) out.push_back(static_cast<OpId>(i));
  }
  return out;
}

std::vector<OpId> with_entry(std::vector<OpId> deps, const EntryDeps& entry, Rank r) {
  if (deps.empty() && !entry.empty()) return entry[r];
  return deps;
}

std::uint32_t ceil_log2(Rank p) {
  std::uint32_t rounds = 0;
  while ((std::uint64_t{1} << rounds) < p) ++rounds;
  return rounds;
}

void append_dissemination(Schedule& s, std::uint64_t size, const EntryDeps& entry) {
  const Rank p = s.nranks;
  const auto rounds = ceil_log2(p);
  for (Rank r = 0; r < p; ++r) {
    std::vector<OpId> previous;
    for (std::uint32_t k = 0; k < rounds; ++k) {
      const Rank dist = static_cast<Rank>((std::uint64_t{1} << k) % p);
      const Rank to = static_cast<Rank>((std::uint64_t{r} + dist) % p);
      const Rank from = static_cast<Rank>((std::uint64_t{r} + p - dist) % p);
      const auto deps = with_entry(previous, entry, r);
      const OpId snd = s.send(r, to, size, deps);
      const OpId rcv = s.recv(r, from, size, deps);
      previous = {snd, rcv};
    }
  }
}

void append_ring_allreduce(Schedule& s, std::uint64_t size, std::uint64_t reduce_cost,
                           const EntryDeps& entry) {
  const Rank p = s.nranks;
  const std::uint64_t chunk = (size + p - 1) / p;
  const std::uint32_t steps = 2 * (p - 1);
  for (Rank r = 0; r < p; ++r) {
    const Rank right = (r + 1) % p;
    const Rank left = (r + p - 1) % p;
    std::vector<OpId> after_step;   // what the next send waits for
    std::vector<OpId> previous_recv;
    for (std::uint32_t j = 0; j < steps; ++j) {
      s.send(r, right, chunk, with_entry(after_step, entry, r));
      const OpId rcv = s.recv(r, left, chunk, with_entry(previous_recv, entry, r));
      previous_recv = {rcv};
      after_step = {rcv};
      if (j + 1 < p && reduce_cost > 0) {
        after_step.push_back(s.calc(r, reduce_cost, {rcv}));
      }
    }
  }
}

void check_ranks(Rank nranks) {
  if (nranks < 2) throw InvalidArgument("collectives need at least 2 ranks");
}

}  // namespace

std::string_view to_string(Pattern pattern) noexcept {
  return pattern == Pattern::dissemination ? "dissemination" : "ring";
}

Pattern pattern_from_string(std::string_view text) {
  if (text == "dissemination" || text == "dissem") return Pattern::dissemination;
  if (text == "ring") return Pattern::ring;
  throw InvalidArgument("unknown collective pattern '" + std::string(text) + "'");
}

Schedule gen_dissemination(Rank nranks, std::uint64_t size) {
  check_ranks(nranks);
  if (size < 1) throw InvalidArgument("message size must be at least 1 byte");
  Schedule s(nranks);
  append_dissemination(s, size, {});
  s.metadata = {{"generator", "dissemination"},
                {"nranks", std::to_string(nranks)},
                {"size", std::to_string(size)}};
  return s;
}

Schedule gen_ring_allreduce(Rank nranks, std::uint64_t size, std::uint64_t reduce_cost_per_chunk) {
  check_ranks(nranks);
  if (size < nranks) throw InvalidArgument("ring allreduce needs size >= rank count");
  Schedule s(nranks);
  append_ring_allreduce(s, size, reduce_cost_per_chunk, {});
  s.metadata = {{"generator", "ring_allreduce"},
                {"nranks", std::to_string(nranks)},
                {"size", std::to_string(size)},
                {"reduce_cost_per_chunk", std::to_string(reduce_cost_per_chunk)}};
  return s;
}

Schedule gen_compute_collective(Rank nranks, std::uint64_t compute_ns, Pattern pattern,
                                std::uint64_t size, std::uint32_t iterations,
                                std::uint64_t reduce_cost_per_chunk) {
  check_ranks(nranks);
  if (iterations < 1) throw InvalidArgument("iterations must be at least 1");
  if (size < 1) throw InvalidArgument("message size must be at least 1 byte");
  if (pattern == Pattern::ring && size < nranks) {
    throw InvalidArgument("ring allreduce needs size >= rank count");
  }

  Schedule s(nranks);
  EntryDeps tails(nranks);
  for (std::uint32_t it = 0; it < iterations; ++it) {
    EntryDeps entry(nranks);
    std::vector<OpId> first(nranks);
    for (Rank r = 0; r < nranks; ++r) {
      entry[r] = {s.calc(r, compute_ns, tails[r])};
      first[r] = static_cast<OpId>(s.ranks[r].size());
    }
    if (pattern == Pattern::dissemination) {
      append_dissemination(s, size, entry);
    } else {
      append_ring_allreduce(s, size, reduce_cost_per_chunk, entry);
    }
    for (Rank r = 0; r < nranks; ++r) tails[r] = terminal_ops(s, r, first[r]);
  }
  s.metadata = {{"generator", "compute_collective"},
                {"nranks", std::to_string(nranks)},
                {"compute_ns", std::to_string(compute_ns)},
                {"pattern", std::string(to_string(pattern))},
                {"size", std::to_string(size)},
                {"iterations", std::to_string(iterations)}};
  return s;
}

}  // namespace nsim::goal
