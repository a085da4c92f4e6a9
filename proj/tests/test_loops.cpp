#include <gtest/gtest.h>

#include "slearner/interpreter.hpp"
#include "slearner/loops.hpp"
#include "support.hpp"

namespace slearner {
namespace {

using testing::load_program;

// Every integer input vector over [lo, hi]^arity.
std::vector<std::vector<InputValue>> int_grid(std::size_t arity, std::int64_t lo, std::int64_t hi) {
  std::vector<std::vector<InputValue>> out(1);
  for (std::size_t i = 0; i < arity; ++i) {
    std::vector<std::vector<InputValue>> next;
    for (const auto& prefix : out) {
      for (auto v = lo; v <= hi; ++v) {
        auto row = prefix;
        row.push_back(InputValue::integer(v));
        next.push_back(std::move(row));
      }
    }
    out = std::move(next);
  }
  return out;
}

void expect_same_outcomes(const std::string& file, std::int64_t lo, std::int64_t hi) {
  Program p = load_program(file);
  Program q = loops_to_tailrec(p);
  EXPECT_EQ(count_loops(q), 0u);
  EXPECT_NO_THROW(parse_program(print_program(q)));
  Interpreter a(p);
  Interpreter b(q);
  RunOptions opts;
  opts.step_budget = 100000;
  std::size_t runs = 0;
  for (const auto& in : int_grid(p.main().params.size(), lo, hi)) {
    auto x = a.run(in, opts);
    auto y = b.run(in, opts);
    ASSERT_EQ(x.kind, y.kind) << file << " " << in.size();
    ASSERT_EQ(x.final_graph.has_value(), y.final_graph.has_value());
    if (x.final_graph) {
      // Main's own variables, unchanged by the transform, are compared.
      std::vector<std::string> vars;
      for (const auto& v : p.main().slots) vars.push_back(v.name);
      vars.push_back("res");
      EXPECT_EQ(x.final_graph->project(vars).encode(), y.final_graph->project(vars).encode());
    }
    ++runs;
  }
  EXPECT_GT(runs, 0u);
}

TEST(Loops, LoopFreeProgramIsUnchanged) {
  Program p = load_program("corpus/fig1.hl");
  EXPECT_EQ(print_program(loops_to_tailrec(p)), print_program(p));
}

TEST(Loops, SingleLoopBecomesOneHelper) {
  Program p = load_program("corpus/traverse.hl");
  Program q = loops_to_tailrec(p);
  EXPECT_EQ(q.functions.size(), p.functions.size() + 1);
  const Function* h = q.find("count_loop1");
  ASSERT_NE(h, nullptr);
  EXPECT_EQ(h->params.size(), 2u);
  EXPECT_EQ(h->returns.size(), 2u);
}

TEST(Loops, NestedLoopsCallInnerFromOuter) {
  Program q = loops_to_tailrec(load_program("corpus/nested.hl"));
  const Function* outer = q.find("pairs_loop1");
  const Function* inner = q.find("pairs_loop2");
  ASSERT_NE(outer, nullptr);
  ASSERT_NE(inner, nullptr);
  auto text = print_program(q);
  auto outer_start = text.find("fn pairs_loop1");
  ASSERT_NE(outer_start, std::string::npos);
  EXPECT_NE(text.find("pairs_loop2(", outer_start), std::string::npos);
}

TEST(Loops, ReturnInsideLoopIsForwarded) {
  Program q = loops_to_tailrec(load_program("corpus/search.hl"));
  const Function* h = q.find("find_loop1");
  ASSERT_NE(h, nullptr);
  ASSERT_EQ(h->returns.size(), 3u);
  EXPECT_EQ(h->returns[1], ValueType::boolean());
}

TEST(Loops, DifferentialTraverse) { expect_same_outcomes("corpus/traverse.hl", -2, 8); }
TEST(Loops, DifferentialNested) { expect_same_outcomes("corpus/nested.hl", -2, 8); }
TEST(Loops, DifferentialSearch) { expect_same_outcomes("corpus/search.hl", -2, 6); }
TEST(Loops, DifferentialSpin) { expect_same_outcomes("corpus/spin.hl", 0, 0); }
TEST(Loops, DifferentialLoopFreeCorpus) {
  for (const char* f : {"corpus/fig1.hl", "corpus/buggy.hl", "corpus/total.hl", "corpus/empty.hl"}) {
    SCOPED_TRACE(f);
    expect_same_outcomes(f, -2, 4);
  }
}

TEST(Loops, SpinExhaustsBudget) {
  Program p = load_program("corpus/spin.hl");
  RunOptions opts;
  opts.step_budget = 10000;
  EXPECT_EQ(Interpreter(p).run({}, opts).kind, OutcomeKind::StepBudgetExceeded);
}

}  // namespace
}  // namespace slearner
