#pragma once

// Schedule IR: one ordered list of send/recv/calc ops per rank with explicit
// rank-local dependencies, plus the GOAL text form and pattern generators.
//
// GOAL grammar accepted by parse_goal (whitespace-insensitive, '#' comments):
//
//   program   := "num_ranks" INT rank*
//   rank      := "rank" INT "{" stmt* "}"
//   stmt      := LABEL ":" op | LABEL "requires" LABEL ("," LABEL)*
//   op        := "send" INT "b" "to" INT
//              | "recv" INT "b" "from" INT
//              | "calc" INT
//
// Op ids are assigned in order of definition within a rank; labels are not
// retained. A dependency may name a label defined later in the same block.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nsim::goal {

using Rank = std::uint32_t;
using OpId = std::uint32_t;

enum class OpKind : std::uint8_t { send, recv, calc };

std::string_view to_string(OpKind kind) noexcept;

struct ScheduleOp {
  OpId id = 0;
  OpKind kind = OpKind::calc;
  Rank peer = 0;            // send/recv only
  std::uint64_t size = 0;   // bytes for send/recv, ns for calc
  std::vector<OpId> deps;   // rank-local ids that must finish first

  friend bool operator==(const ScheduleOp&, const ScheduleOp&) = default;
};

struct Schedule {
  Rank nranks = 0;
  std::vector<std::vector<ScheduleOp>> ranks;
  /// Generator name and parameters. Not part of structural equality and not
  /// carried by the GOAL text form.
  std::map<std::string, std::string> metadata;

  explicit Schedule(Rank n = 0) : nranks(n), ranks(n) {}

  /// Appends an op to `rank` and returns its id.
  OpId add(Rank rank, OpKind kind, Rank peer, std::uint64_t size,
           std::vector<OpId> deps = {});
  OpId send(Rank rank, Rank to, std::uint64_t bytes, std::vector<OpId> deps = {}) {
    return add(rank, OpKind::send, to, bytes, std::move(deps));
  }
  OpId recv(Rank rank, Rank from, std::uint64_t bytes, std::vector<OpId> deps = {}) {
    return add(rank, OpKind::recv, from, bytes, std::move(deps));
  }
  OpId calc(Rank rank, std::uint64_t ns, std::vector<OpId> deps = {}) {
    return add(rank, OpKind::calc, 0, ns, std::move(deps));
  }

  std::size_t op_count() const noexcept;

  friend bool operator==(const Schedule& a, const Schedule& b) {
    return a.nranks == b.nranks && a.ranks == b.ranks;
  }
};

struct Violation {
  enum class Kind { peer_out_of_range, self_peer, dangling_dependency, cycle, unmatched };
  Kind kind;
  Rank rank = 0;
  OpId op = 0;
  std::string message;
};

/// Empty iff every op references valid ranks and ops, per-rank dependencies
/// are acyclic, and sends and recvs match as multisets per (src, dst, size).
std::vector<Violation> validate(const Schedule& schedule);

/// Throws ValidationError listing every violation.
void require_valid(const Schedule& schedule);

/// Parses and validates. Syntax problems raise ParseError with line and
/// column; well-formed programs that fail validate() raise ValidationError.
Schedule parse_goal(std::string_view text);

/// Canonical text: labels l<id>, one statement per line, dependencies after
/// the op definitions of each rank.
std::string emit_goal(const Schedule& schedule);
void emit_goal(const Schedule& schedule, std::ostream& out);

/// ceil(log2 P) rounds; in round k rank r sends to (r + 2^k) mod P and
/// receives from (r - 2^k) mod P. Both ops of round k+1 depend on both ops of
/// round k.
Schedule gen_dissemination(Rank nranks, std::uint64_t size);

/// Reduce-scatter (P-1 steps, each recv followed by a reduction calc when
/// `reduce_cost_per_chunk` > 0) then allgather (P-1 steps), passing
/// ceil(size/P)-byte chunks to (r+1) mod P.
Schedule gen_ring_allreduce(Rank nranks, std::uint64_t size, std::uint64_t reduce_cost_per_chunk);

enum class Pattern { dissemination, ring };

std::string_view to_string(Pattern pattern) noexcept;
Pattern pattern_from_string(std::string_view text);

/// `iterations` x (calc(compute_ns) on every rank, then the collective). The
/// calc of iteration i+1 waits for the terminal collective ops of iteration i.
Schedule gen_compute_collective(Rank nranks, std::uint64_t compute_ns, Pattern pattern,
                                std::uint64_t size, std::uint32_t iterations,
                                std::uint64_t reduce_cost_per_chunk = 0);

/// JSON export mirroring the IR one-to-one.
std::string to_json(const Schedule& schedule, int indent = -1);
Schedule schedule_from_json(std::string_view json);

}  // namespace nsim::goal
