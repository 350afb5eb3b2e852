#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "nsim/error.hpp"
#include "nsim/goal.hpp"

namespace nsim::goal {

std::string_view to_string(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::send: return "send";
    case OpKind::recv: return "recv";
    case OpKind::calc: return "calc";
  }
  return "?";
}

OpId Schedule::add(Rank rank, OpKind kind, Rank peer, std::uint64_t size,
                   std::vector<OpId> deps) {
  if (rank >= ranks.size()) throw InvalidArgument("rank " + std::to_string(rank) + " out of range");
  auto& ops = ranks[rank];
  const auto id = static_cast<OpId>(ops.size());
  ops.push_back(ScheduleOp{id, kind, kind == OpKind::calc ? 0 : peer, size, std::move(deps)});
  return id;
}

std::size_t Schedule::op_count() const noexcept {
  std::size_t n = 0;
  for (const auto& ops : ranks) n += ops.size();
  return n;
}

std::vector<Violation> validate(const Schedule& s) {
  std::vector<Violation> out;
  if (s.ranks.size() != s.nranks) {
    out.push_back({Violation::Kind::peer_out_of_range, 0, 0,
                   "schedule declares " + std::to_string(s.nranks) + " ranks but has " +
                       std::to_string(s.ranks.size()) + " rank blocks"});
    return out;
  }

  // (src, dst, size) -> sends minus recvs
  std::map<std::tuple<Rank, Rank, std::uint64_t>, std::int64_t> balance;

  for (Rank r = 0; r < s.nranks; ++r) {
    const auto& ops = s.ranks[r];
    const auto n = ops.size();
    std::vector<std::uint32_t> indegree(n, 0);
    std::vector<std::vector<OpId>> dependents(n);
    bool dangling = false;

    for (std::size_t i = 0; i < n; ++i) {
      const auto& op = ops[i];
      const std::string where = "rank " + std::to_string(r) + " op " + std::to_string(i);
      if (op.id != i) {
        out.push_back({Violation::Kind::dangling_dependency, r, static_cast<OpId>(i),
                       where + ": id " + std::to_string(op.id) + " does not match its position"});
      }
      if (op.kind != OpKind::calc) {
        if (op.peer >= s.nranks) {
          out.push_back({Violation::Kind::peer_out_of_range, r, op.id,
                         where + ": peer " + std::to_string(op.peer) + " out of range"});
        } else if (op.peer == r) {
          out.push_back({Violation::Kind::self_peer, r, op.id, where + ": peer is the rank itself"});
        } else if (op.kind == OpKind::send) {
          ++balance[{r, op.peer, op.size}];
        } else {
          --balance[{op.peer, r, op.size}];
        }
      }
      for (OpId d : op.deps) {
        if (d >= n) {
          out.push_back({Violation::Kind::dangling_dependency, r, op.id,
                         where + ": dependency on missing op " + std::to_string(d)});
          dangling = true;
          continue;
        }
        ++indegree[i];
        dependents[d].push_back(static_cast<OpId>(i));
      }
    }

    if (dangling) continue;
    std::vector<OpId> ready;
    for (std::size_t i = 0; i < n; ++i) {
      if (indegree[i] == 0) ready.push_back(static_cast<OpId>(i));
    }
    std::size_t visited = 0;
    while (!ready.empty()) {
      const OpId v = ready.back();
      ready.pop_back();
      ++visited;
      for (OpId w : dependents[v]) {
        if (--indegree[w] == 0) ready.push_back(w);
      }
    }
    if (visited != n) {
      out.push_back({Violation::Kind::cycle, r, 0,
                     "rank " + std::to_string(r) + ": cyclic dependencies among " +
                         std::to_string(n - visited) + " ops"});
    }
  }

  for (const auto& [key, diff] : balance) {
    if (diff == 0) continue;
    const auto& [src, dst, size] = key;
    std::ostringstream msg;
    msg << (diff > 0 ? diff : -diff) << " unmatched " << (diff > 0 ? "send(s)" : "recv(s)")
        << " " << src << " -> " << dst << " of " << size << "b";
    out.push_back({Violation::Kind::unmatched, diff > 0 ? src : dst, 0, msg.str()});
  }
  return out;
}

void require_valid(const Schedule& schedule) {
  auto violations = validate(schedule);
  if (violations.empty()) return;
  std::vector<std::string> messages;
  messages.reserve(violations.size());
  for (auto& v : violations) messages.push_back(std::move(v.message));
  throw ValidationError("invalid schedule", std::move(messages));
}

void emit_goal(const Schedule& s, std::ostream& out) {
  out << "num_ranks " << s.nranks << "\n";
  for (Rank r = 0; r < s.ranks.size(); ++r) {
    const auto& ops = s.ranks[r];
    if (ops.empty()) {
      out << "\nrank " << r << " { }\n";
      continue;
    }
    out << "\nrank " << r << " {\n";
    for (const auto& op : ops) {
      out << "  l" << op.id + 1 << ": ";
      switch (op.kind) {
        case OpKind::send: out << "send " << op.size << "b to " << op.peer; break;
        case OpKind::recv: out << "recv " << op.size << "b from " << op.peer; break;
        case OpKind::calc: out << "calc " << op.size; break;
      }
      out << "\n";
    }
    for (const auto& op : ops) {
      if (op.deps.empty()) continue;
      out << "  l" << op.id + 1 << " requires ";
      for (std::size_t i = 0; i < op.deps.size(); ++i) {
        out << (i ? ", l" : "l") << op.deps[i] + 1;
      }
      out << "\n";
    }
    out << "}\n";
  }
}

std::string emit_goal(const Schedule& schedule) {
  std::ostringstream out;
  emit_goal(schedule, out);
  return out.str();
}

}  // namespace nsim::goal
