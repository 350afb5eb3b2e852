#include <charconv>
#include <optional>
#include <unordered_map>

#include "nsim/error.hpp"
#include "nsim/goal.hpp"

namespace nsim::goal {
namespace {

struct Token {
  enum class Type { word, lbrace, rbrace, colon, comma, end };
  Type type = Type::end;
  std::string_view text;
  std::size_t line = 1;
  std::size_t column = 1;
};

bool is_word_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_blank();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (pos_ >= text_.size()) return tok;
    const char c = text_[pos_];
    auto single = [&](Token::Type type) {
      tok.type = type;
      tok.text = text_.substr(pos_, 1);
      advance();
      return tok;
    };
    switch (c) {
      case '{': return single(Token::Type::lbrace);
      case '}': return single(Token::Type::rbrace);
      case ':': return single(Token::Type::colon);
      case ',': return single(Token::Type::comma);
      default: break;
    }
    if (!is_word_char(c)) {
      throw ParseError(std::string("unexpected character '") + c + "'", line_, column_);
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_word_char(text_[pos_])) advance();
    tok.type = Token::Type::word;
    tok.text = text_.substr(start, pos_ - start);
    return tok;
  }

 private:
  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_blank() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

struct PendingDep {
  std::string_view op_label;
  std::string_view dep_label;
  std::size_t line;
  std::size_t column;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { shift(); }

  Schedule parse() {
    expect_keyword("num_ranks");
    const auto nranks = parse_uint<Rank>("rank count");
    if (nranks < 1) throw error("num_ranks must be at least 1");
    Schedule schedule(nranks);
    std::vector<bool> seen(nranks, false);

    while (tok_.type != Token::Type::end) {
      expect_keyword("rank");
      const Token rank_tok = tok_;
      const auto rank = parse_uint<Rank>("rank id");
      if (rank >= nranks) {
        throw ParseError("rank " + std::to_string(rank) + " out of range", rank_tok.line,
                         rank_tok.column);
      }
      if (seen[rank]) {
        throw ParseError("duplicate block for rank " + std::to_string(rank), rank_tok.line,
                         rank_tok.column);
      }
      seen[rank] = true;
      parse_block(schedule, rank);
    }
    return schedule;
  }

 private:
  void parse_block(Schedule& schedule, Rank rank) {
    expect(Token::Type::lbrace, "'{'");
    std::unordered_map<std::string_view, OpId> labels;
    std::vector<PendingDep> pending;

    while (tok_.type != Token::Type::rbrace) {
      if (tok_.type != Token::Type::word || is_digit(tok_.text.front())) {
        throw error("expected a label or '}'");
      }
      const Token label = tok_;
      shift();
      if (tok_.type == Token::Type::colon) {
        shift();
        if (labels.contains(label.text)) {
          throw ParseError("duplicate label '" + std::string(label.text) + "'", label.line,
                           label.column);
        }
        labels.emplace(label.text, parse_op(schedule, rank));
      } else if (tok_.type == Token::Type::word && tok_.text == "requires") {
        shift();
        for (;;) {
          if (tok_.type != Token::Type::word) throw error("expected a label after 'requires'");
          pending.push_back({label.text, tok_.text, tok_.line, tok_.column});
          shift();
          if (tok_.type != Token::Type::comma) break;
          shift();
        }
      } else {
        throw error("expected ':' or 'requires' after label '" + std::string(label.text) + "'");
      }
    }
    shift();  // '}'

    for (const auto& dep : pending) {
      const auto op = labels.find(dep.op_label);
      if (op == labels.end()) {
        throw ParseError("dependency on undefined label '" + std::string(dep.op_label) + "'",
                         dep.line, dep.column);
      }
      const auto target = labels.find(dep.dep_label);
      if (target == labels.end()) {
        throw ParseError("dependency on undefined label '" + std::string(dep.dep_label) + "'",
                         dep.line, dep.column);
      }
      schedule.ranks[rank][op->second].deps.push_back(target->second);
    }
  }

  OpId parse_op(Schedule& schedule, Rank rank) {
    if (tok_.type != Token::Type::word) throw error("expected send, recv or calc");
    const std::string_view kind = tok_.text;
    if (kind == "calc") {
      shift();
      return schedule.calc(rank, parse_uint<std::uint64_t>("calc duration"));
    }
    if (kind != "send" && kind != "recv") throw error("expected send, recv or calc");
    shift();
    const auto size = parse_size();
    expect_keyword(kind == "send" ? "to" : "from");
    const auto peer = parse_uint<Rank>("peer rank");
    return kind == "send" ? schedule.send(rank, peer, size) : schedule.recv(rank, peer, size);
  }

  // "16b" or "16 b"
  std::uint64_t parse_size() {
    if (tok_.type != Token::Type::word || !is_digit(tok_.text.front())) {
      throw error("expected a message size such as 16b");
    }
    std::string_view digits = tok_.text;
    const bool suffixed = digits.back() == 'b';
    if (suffixed) digits.remove_suffix(1);
    const auto value = to_uint<std::uint64_t>(digits, "message size");
    shift();
    if (!suffixed) expect_keyword("b");
    return value;
  }

  template <typename T>
  T parse_uint(const char* what) {
    if (tok_.type != Token::Type::word) throw error(std::string("expected ") + what);
    const T value = to_uint<T>(tok_.text, what);
    shift();
    return value;
  }

  template <typename T>
  T to_uint(std::string_view digits, const char* what) {
    T value{};
    const auto* first = digits.data();
    const auto* last = first + digits.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (digits.empty() || ec != std::errc{} || ptr != last) {
      throw error(std::string("invalid ") + what + " '" + std::string(tok_.text) + "'");
    }
    return value;
  }

  void expect_keyword(std::string_view keyword) {
    if (tok_.type != Token::Type::word || tok_.text != keyword) {
      throw error("expected '" + std::string(keyword) + "'");
    }
    shift();
  }

  void expect(Token::Type type, const char* what) {
    if (tok_.type != type) throw error(std::string("expected ") + what);
    shift();
  }

  ParseError error(const std::string& message) const {
    std::string found = tok_.type == Token::Type::end ? std::string("end of input")
                                                      : "'" + std::string(tok_.text) + "'";
    return ParseError(message + ", found " + found, tok_.line, tok_.column);
  }

  void shift() { tok_ = lexer_.next(); }

  Lexer lexer_;
  Token tok_;
};

}  // namespace

Schedule parse_goal(std::string_view text) {
  Schedule schedule = Parser(text).parse();
  require_valid(schedule);
  return schedule;
}

}  // namespace nsim::goal
