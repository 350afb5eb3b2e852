#include "nsim/error.hpp"

#include <sstream>

namespace nsim {
namespace {

std::string join_violations(const std::string& head, const std::vector<std::string>& items,
                            std::size_t limit = 8) {
  std::ostringstream out;
  out << head;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    out << (i == 0 ? ": " : "; ") << items[i];
  }
  if (items.size() > limit) out << "; ... (" << items.size() - limit << " more)";
  return out.str();
}

}  // namespace

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::validation: return "validation";
    case ErrorCode::io: return "io";
    case ErrorCode::deadlock: return "deadlock";
  }
  return "unknown";
}

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error(ErrorCode::parse,
            std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      message_(message),
      line_(line),
      column_(column) {}

ValidationError::ValidationError(std::vector<std::string> violations)
    : ValidationError("validation failed", std::move(violations)) {}

ValidationError::ValidationError(const std::string& context,
                                 std::vector<std::string> violations)
    : Error(ErrorCode::validation, join_violations(context, violations)),
      violations_(std::move(violations)) {}

DeadlockError::DeadlockError(std::vector<std::string> blocked_ops)
    : Error(ErrorCode::deadlock,
            join_violations("simulation deadlocked with " +
                                std::to_string(blocked_ops.size()) + " blocked ops",
                            blocked_ops)),
      blocked_(std::move(blocked_ops)) {}

}  // namespace nsim
