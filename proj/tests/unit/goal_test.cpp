#include <gtest/gtest.h>

#include <random>

#include "nsim/error.hpp"
#include "nsim/goal.hpp"
#include "random_schedule.hpp"

namespace nsim::goal {
namespace {

TEST(ParseGoal, MinimalProgram) {
  const auto s = parse_goal(
      "num_ranks 2\nrank 0 { l1: send 16b to 1 }\nrank 1 { l1: recv 16b from 0 }");
  ASSERT_EQ(s.nranks, 2u);
  ASSERT_EQ(s.ranks[0].size(), 1u);
  ASSERT_EQ(s.ranks[1].size(), 1u);
  EXPECT_EQ(s.ranks[0][0].kind, OpKind::send);
  EXPECT_EQ(s.ranks[0][0].peer, 1u);
  EXPECT_EQ(s.ranks[0][0].size, 16u);
  EXPECT_EQ(s.ranks[1][0].kind, OpKind::recv);
  EXPECT_EQ(s.ranks[1][0].peer, 0u);
}

TEST(ParseGoal, RequiresRecordsDependency) {
  const auto s = parse_goal(R"(
    num_ranks 2
    rank 0 {
      l1: calc 100
      l2: send 8b to 1
      l2 requires l1
    }
    rank 1 { a: recv 8b from 0 }
  )");
  ASSERT_EQ(s.ranks[0].size(), 2u);
  EXPECT_EQ(s.ranks[0][1].deps, std::vector<OpId>{0});
  EXPECT_EQ(s.ranks[0][0].size, 100u);
  EXPECT_EQ(s.ranks[0][0].kind, OpKind::calc);
}

TEST(ParseGoal, CommentsWhitespaceAndSeparateSizeSuffix) {
  const auto s = parse_goal(
      "# header comment\nnum_ranks 2 # trailing\nrank 0{x:send 4 b to 1}rank 1{\n y : recv 4b from 0\n}\n");
  EXPECT_EQ(s.ranks[0][0].size, 4u);
  EXPECT_EQ(s.op_count(), 2u);
}

TEST(ParseGoal, MultipleDependenciesAndForwardReferences) {
  const auto s = parse_goal(R"(num_ranks 1
    rank 0 {
      c requires a, b
      a: calc 1
      b: calc 2
      c: calc 3
    })");
  EXPECT_EQ(s.ranks[0][2].deps, (std::vector<OpId>{0, 1}));
}

TEST(ParseGoal, OmittedRankBlocksAreEmpty) {
  const auto s = parse_goal("num_ranks 3\nrank 1 { a: calc 5 }");
  EXPECT_TRUE(s.ranks[0].empty());
  EXPECT_EQ(s.ranks[1].size(), 1u);
  EXPECT_TRUE(s.ranks[2].empty());
}

void expect_parse_error_at(const std::string& text, std::size_t line) {
  try {
    parse_goal(text);
    FAIL() << "expected a parse error for:\n" << text;
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), line) << e.what();
    EXPECT_GE(e.column(), 1u);
  }
}

TEST(ParseGoal, SyntaxErrorsCarryPosition) {
  expect_parse_error_at("rank 0 { }", 1);
  expect_parse_error_at("num_ranks 2\nrank 0 { l1: sned 16b to 1 }", 2);
  expect_parse_error_at("num_ranks 2\nrank 0 {\n l1: send 16x to 1 }", 3);
  expect_parse_error_at("num_ranks 2\nrank 0 { l1: send 16b to 1 ", 2);
  expect_parse_error_at("num_ranks 2\nrank 0 { l1: calc 1\n l1: calc 2 }", 3);
  expect_parse_error_at("num_ranks 2\nrank 0 { l1: calc 1 }\nrank 0 { }", 3);
  expect_parse_error_at("num_ranks 2\nrank 5 { }", 2);
  expect_parse_error_at("num_ranks 1\nrank 0 { l2 requires l9\n l2: calc 1 }", 2);
  expect_parse_error_at("num_ranks 0", 1);
}

TEST(ParseGoal, SemanticProblemsAreValidationErrors) {
  // Peer out of range.
  EXPECT_THROW(parse_goal("num_ranks 2\nrank 0 { a: send 1b to 7 }"), ValidationError);
  // Unmatched send.
  EXPECT_THROW(parse_goal("num_ranks 2\nrank 0 { a: send 1b to 1 }"), ValidationError);
  // Size mismatch is unmatched in both directions.
  EXPECT_THROW(parse_goal("num_ranks 2\nrank 0 { a: send 1b to 1 }\nrank 1 { a: recv 2b from 0 }"),
               ValidationError);
  // Cyclic requires.
  EXPECT_THROW(parse_goal("num_ranks 1\nrank 0 { a: calc 1\n b: calc 1\n a requires b\n b requires a }"),
               ValidationError);
  // Self message.
  EXPECT_THROW(parse_goal("num_ranks 2\nrank 0 { a: send 1b to 0\n b: recv 1b from 0 }"),
               ValidationError);
}

TEST(Validate, ReportsEachViolationAsData) {
  Schedule s(2);
  s.send(0, 1, 8);
  auto v = validate(s);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::unmatched);

  Schedule c(1);
  c.calc(0, 1, {1});
  c.calc(0, 1, {0});
  v = validate(c);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::cycle);

  Schedule d(1);
  d.calc(0, 1, {4});
  v = validate(d);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].kind, Violation::Kind::dangling_dependency);
}

TEST(EmitGoal, EmptyRankAndCalcLines) {
  Schedule s(2);
  s.calc(1, 5000);
  s.calc(1, 7, {0});
  const auto text = emit_goal(s);
  EXPECT_NE(text.find("rank 0 { }"), std::string::npos) << text;
  EXPECT_NE(text.find("l1: calc 5000"), std::string::npos) << text;
  EXPECT_NE(text.find("l2 requires l1"), std::string::npos) << text;
}

TEST(EmitGoal, RoundTripsRandomSchedules) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const auto P = std::uniform_int_distribution<Rank>(1, 9)(rng);
    const auto s = testing::random_schedule(rng, P, 30, 10);
    ASSERT_TRUE(validate(s).empty());
    EXPECT_EQ(parse_goal(emit_goal(s)), s);
  }
}

TEST(EmitGoal, RoundTripsEveryGenerator) {
  for (Rank P = 2; P <= 9; ++P) {
    for (const auto& s :
         {gen_dissemination(P, 16), gen_ring_allreduce(P, 1000, 0), gen_ring_allreduce(P, 1000, 50),
          gen_compute_collective(P, 100, Pattern::dissemination, 64, 3),
          gen_compute_collective(P, 100, Pattern::ring, 4096, 2, 10)}) {
      EXPECT_EQ(parse_goal(emit_goal(s)), s) << "P=" << P;
    }
  }
}

TEST(ScheduleJson, RoundTripsIncludingMetadata) {
  const auto s = gen_compute_collective(4, 100, Pattern::ring, 4096, 2, 10);
  const auto back = schedule_from_json(to_json(s));
  EXPECT_EQ(back, s);
  EXPECT_EQ(back.metadata, s.metadata);
}

TEST(ScheduleJson, MalformedDocumentsAreRejected) {
  EXPECT_THROW(schedule_from_json("{"), ParseError);
  EXPECT_THROW(schedule_from_json(R"({"schema":"nsim.schedule/1"})"), InvalidArgument);
  EXPECT_THROW(schedule_from_json(R"({"schema":"other/1","nranks":1,"ranks":[[]]})"), InvalidArgument);
}

}  // namespace
}  // namespace nsim::goal
