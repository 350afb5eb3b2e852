#include <nlohmann/json.hpp>

#include "nsim/error.hpp"
#include "nsim/goal.hpp"

namespace nsim::goal {

using nlohmann::json;

std::string to_json(const Schedule& s, int indent) {
  json ranks = json::array();
  for (const auto& ops : s.ranks) {
    json rank_ops = json::array();
    for (const auto& op : ops) {
      json j = {{"id", op.id}, {"kind", to_string(op.kind)}, {"size", op.size}, {"deps", op.deps}};
      if (op.kind != OpKind::calc) j["peer"] = op.peer;
      rank_ops.push_back(std::move(j));
    }
    ranks.push_back(std::move(rank_ops));
  }
  json doc = {{"schema", "nsim.schedule/1"},
              {"nranks", s.nranks},
              {"metadata", s.metadata},
              {"ranks", std::move(ranks)}};
  return doc.dump(indent);
}

Schedule schedule_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), 1, e.byte);
  }
  try {
    if (doc.at("schema").get<std::string>() != "nsim.schedule/1") {
      throw InvalidArgument("unsupported schedule schema");
    }
    Schedule s(doc.at("nranks").get<Rank>());
    s.metadata = doc.value("metadata", std::map<std::string, std::string>{});
    const auto& ranks = doc.at("ranks");
    if (ranks.size() != s.nranks) throw InvalidArgument("rank array length differs from nranks");
    for (Rank r = 0; r < s.nranks; ++r) {
      for (const auto& j : ranks[r]) {
        const auto kind_name = j.at("kind").get<std::string>();
        OpKind kind = OpKind::calc;
        if (kind_name == "send") kind = OpKind::send;
        else if (kind_name == "recv") kind = OpKind::recv;
        else if (kind_name != "calc") throw InvalidArgument("unknown op kind '" + kind_name + "'");
        const OpId id = s.add(r, kind, j.value("peer", Rank{0}), j.at("size").get<std::uint64_t>(),
                              j.at("deps").get<std::vector<OpId>>());
        if (j.at("id").get<OpId>() != id) throw InvalidArgument("op ids must be dense and ordered");
      }
    }
    require_valid(s);
    return s;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed schedule JSON: ") + e.what());
  }
}

}  // namespace nsim::goal
