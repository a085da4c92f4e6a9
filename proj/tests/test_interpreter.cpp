#include <gtest/gtest.h>

#include "slearner/interpreter.hpp"
#include "support.hpp"

namespace slearner {
namespace {

using testing::load_program;

TEST(Interpreter, Fig1PositiveRunSnapshotsTheListPair) {
  Program p = load_program("corpus/fig1.hl");
  Interpreter interp(p);
  RunOptions opts;
  opts.snapshot_gaps = {2};
  std::vector<InputValue> in = {InputValue::integer(0), InputValue::integer(1)};
  auto out = interp.run(in, opts);
  EXPECT_EQ(out.kind, OutcomeKind::Normal);
  ASSERT_EQ(out.trace.size(), 1u);
  std::vector<std::string> vars = {"x", "y"};
  EXPECT_EQ(out.trace[0].graph.project(vars).dump(),
            "type(0)=init\n0 -x-> 1\n0 -y-> 2\ntype(1)=null\ntype(2)=Node\n2 -data-> 3\n2 -next-> 1\n"
            "type(3)=int\nval(3)=1\n");
}

TEST(Interpreter, Fig1NegativeRunFailsOnYData) {
  Program p = load_program("corpus/fig1.hl");
  Interpreter interp(p);
  std::vector<InputValue> in = {InputValue::integer(1), InputValue::integer(0)};
  auto out = interp.run(in, RunOptions{});
  EXPECT_EQ(out.kind, OutcomeKind::MemoryError);
  EXPECT_NE(out.message.find("y.data"), std::string::npos) << out.message;
}

TEST(Heaplang, CorpusPrintsAndReparsesToAFixpoint) {
  for (const char* f : {"corpus/fig1.hl", "corpus/buggy.hl", "corpus/traverse.hl", "corpus/nested.hl",
                        "corpus/search.hl", "corpus/spin.hl", "corpus/total.hl", "corpus/empty.hl"}) {
    SCOPED_TRACE(f);
    const std::string once = print_program(load_program(f));
    EXPECT_EQ(print_program(parse_program(once)), once);
  }
}

TEST(Heaplang, SyntaxAndTypeErrorsCarryLocations) {
  auto message = [](const char* src) {
    try {
      parse_program(src);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_EQ(message("fn main( {"), "1:10: expected parameter name");
  EXPECT_EQ(message("fn main() { y = 3; }"), "1:13: undeclared variable 'y'");
  EXPECT_EQ(message("fn main() { var x: int = f(1); }"), "1:13: unknown function 'f'");
  EXPECT_EQ(message("fn main() { var x: int = g(1, 2); }\nfn g(a: int) -> int { return a; }"),
            "1:13: function 'g' expects 1 argument(s), got 2");
  EXPECT_EQ(message("type Node { data: int; next: Node; }\nfn main() { var x: Node = 3; }"),
            "2:27: cannot initialise 'x' of type Node");
}

TEST(Heaplang, ConstantsComeFromComparisons) {
  auto p = parse_program("fn main(n: int) { var m: int = n - 7; if (m > 3) { m = 0; } }");
  EXPECT_EQ(harvest_constants(p), (std::vector<std::int64_t>{3}));
}

TEST(Interpreter, AssertionAndPostconditionFailuresAreViolations) {
  auto p = parse_program(R"(type Node { data: int; next: Node; }
fn main(n: int) ensures x = null {
  var x: Node = new Node(n, null);
  assert n > 100;
})");
  Interpreter interp(p);
  std::vector<InputValue> small = {InputValue::integer(1)};
  auto a = interp.run(small, RunOptions{});
  EXPECT_EQ(a.kind, OutcomeKind::PostViolation);
  EXPECT_EQ(a.message, "4:3: assertion failed");
  std::vector<InputValue> big = {InputValue::integer(200)};
  auto b = interp.run(big, RunOptions{});
  EXPECT_EQ(b.kind, OutcomeKind::PostViolation);
  EXPECT_EQ(b.label(), Label::Negative);
  RunOptions unchecked;
  unchecked.check_ensures = false;
  EXPECT_EQ(interp.run(big, unchecked).kind, OutcomeKind::Normal);
}

TEST(Interpreter, FailedAssumptionEndsTheRunNormally) {
  auto p = parse_program("fn main(n: int) ensures true { assume n > 0; var m: int = n; }");
  Interpreter interp(p);
  std::vector<InputValue> in = {InputValue::integer(-1)};
  auto out = interp.run(in, RunOptions{});
  EXPECT_EQ(out.kind, OutcomeKind::Normal);
  EXPECT_EQ(out.label(), Label::Positive);
}

TEST(Interpreter, BudgetsStopNonterminationAndDeepRecursion) {
  Program forever = load_program("corpus/spin.hl");
  Interpreter spin(forever);
  RunOptions opts;
  opts.step_budget = 1000;
  auto a = spin.run({}, opts);
  EXPECT_EQ(a.kind, OutcomeKind::StepBudgetExceeded);
  EXPECT_FALSE(a.final_graph);

  Program p = load_program("corpus/fig1.hl");
  Interpreter interp(p);
  std::vector<InputValue> in = {InputValue::integer(0), InputValue::integer(5000)};
  auto b = interp.run(in, RunOptions{});
  EXPECT_EQ(b.kind, OutcomeKind::StepBudgetExceeded);
  EXPECT_EQ(b.label(), Label::Negative);
}

TEST(Interpreter, ResumingFromASnapshotReproducesTheRun) {
  Program p = load_program("corpus/fig1.hl");
  Interpreter interp(p);
  RunOptions opts;
  opts.snapshot_gaps = {1, 2};
  for (std::int64_t m = 0; m <= 2; ++m) {
    for (std::int64_t n = 0; n <= 2; ++n) {
      std::vector<InputValue> in = {InputValue::integer(m), InputValue::integer(n)};
      auto full = interp.run(in, opts);
      ASSERT_EQ(full.trace.size(), 2u);
      for (const auto& snap : full.trace) {
        auto rest = interp.resume(snap.gap, snap.graph, RunOptions{});
        EXPECT_EQ(rest.kind, full.kind) << m << " " << n << " gap " << snap.gap;
      }
    }
  }
}

TEST(Interpreter, RunsRejectMismatchedInputs) {
  Program p = load_program("corpus/fig1.hl");
  Interpreter interp(p);
  std::vector<InputValue> one = {InputValue::integer(0)};
  EXPECT_THROW(interp.run(one, RunOptions{}), Error);
  std::vector<InputValue> wrong = {InputValue::null(), InputValue::integer(0)};
  EXPECT_THROW(interp.run(wrong, RunOptions{}), Error);
}

}  // namespace
}  // namespace slearner
