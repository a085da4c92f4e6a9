#include <fmt/format.h>
#include <gtest/gtest.h>

#include "slearner/loops.hpp"
#include "slearner/mutation.hpp"
#include "slearner/verifier.hpp"
#include "support.hpp"
#include "table3.hpp"

namespace slearner {
namespace {

using testing::load_program;

const Program& fig1() {
  static const Program p = load_program("corpus/fig1.hl");
  return p;
}

MemoryGraph snapshot(std::size_t gap, std::int64_t m, std::int64_t n) {
  Interpreter interp(fig1());
  RunOptions opts;
  opts.snapshot_gaps = {gap};
  std::vector<InputValue> in = {InputValue::integer(m), InputValue::integer(n)};
  auto out = interp.run(in, opts);
  EXPECT_EQ(out.trace.size(), 1u);
  return out.trace.at(0).graph;
}

FeatureCatalog list_pair_catalog() {
  std::vector<TypedPath> refs = {{Path("x"), ValueType::ref("Node")}, {Path("y"), ValueType::ref("Node")}};
  return build_catalog(refs, {}, std::vector<const PredicateDef*>{PredicateRegistry::builtin().find("sll")}, {},
                       fig1().schema);
}

std::string row_string(const FeatureVector& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) s += ' ';
    s += tri_char(v[i]);
  }
  return s;
}

Mutation make(Mutation::Kind kind, const std::string& target) {
  Mutation m;
  m.kind = kind;
  m.target = Path::parse(target);
  return m;
}

TEST(Mutation, RepointingTheTailToTheHeadMakesACycle) {
  // x = null, y a one-node list; y.next := y gives the cyclic matrix row.
  auto g = snapshot(2, 0, 1);
  auto m = make(Mutation::Kind::Repoint, "y.next");
  m.node = *resolve(g, Path("y"));
  m.type = "Node";
  auto h = apply(g, m, fig1().schema);
  EXPECT_EQ(resolve(h, Path::parse("y.next")), resolve(h, Path("y")));
  std::string want = testing::kTable3Rows[8];
  EXPECT_EQ(row_string(evaluate(list_pair_catalog(), h)), want.substr(0, want.size() - 2));
  // The input graph is untouched.
  EXPECT_EQ(resolve(g, Path::parse("y.next")), kNullNode);
}

TEST(Mutation, FreshObjectHasNullAndZeroFields) {
  auto g = snapshot(2, 0, 1);
  auto m = make(Mutation::Kind::FreshObject, "x");
  m.type = "Node";
  auto h = apply(g, m, fig1().schema);
  auto x = resolve(h, Path("x"));
  ASSERT_TRUE(x);
  EXPECT_TRUE(h.is_record(*x));
  EXPECT_NE(x, resolve(h, Path("y")));
  EXPECT_EQ(resolve(h, Path::parse("x.next")), kNullNode);
  EXPECT_EQ(h.value(*resolve(h, Path::parse("x.data"))), 0);
}

TEST(Mutation, SwapsAndNumericEdits) {
  auto g = snapshot(1, 1, 2);  // x a one-node list, n = 2
  const Schema& s = fig1().schema;
  auto swap = make(Mutation::Kind::SwapRef, "x");
  swap.other = Path::parse("x.next");
  auto h = apply(g, swap, s);
  EXPECT_EQ(resolve(h, Path("x")), kNullNode);

  auto set = make(Mutation::Kind::SetConst, "n");
  set.value = 5;
  EXPECT_EQ(apply(g, set, s).value(*resolve(apply(g, set, s), Path("n"))), 5);

  auto off = make(Mutation::Kind::Offset, "n");
  off.value = -1;
  auto o = apply(g, off, s);
  EXPECT_EQ(o.value(*resolve(o, Path("n"))), 1);

  auto sn = make(Mutation::Kind::SwapNum, "n");
  sn.other = Path::parse("x.data");
  auto w = apply(g, sn, s);
  EXPECT_EQ(w.value(*resolve(w, Path("n"))), 1);
  EXPECT_EQ(w.value(*resolve(w, Path::parse("x.data"))), 2);
}

TEST(Mutation, InvalidMutationsAreRejected) {
  auto g = snapshot(2, 0, 1);  // x = null
  const Schema& s = fig1().schema;
  EXPECT_THROW(apply(g, make(Mutation::Kind::Repoint, "x.next"), s), Error);
  EXPECT_THROW(apply(g, make(Mutation::Kind::Offset, "y"), s), Error);
  auto bad = make(Mutation::Kind::Repoint, "y");
  bad.node = kInitNode;
  EXPECT_THROW(apply(g, bad, s), Error);
}

TEST(Mutation, PlanOrderAndTargets) {
  auto g = snapshot(2, 0, 1);
  auto c = list_pair_catalog();
  std::vector<TypedPath> vars = {{Path("x"), ValueType::ref("Node")}, {Path("y"), ValueType::ref("Node")}};
  // `x = null | y != null` mentions both variables; y resolves to a record,
  // so its fields follow.
  FeatureFormula f;
  f.kind = FeatureFormula::Kind::Dnf;
  f.regions = {{0}, {3}};
  std::vector<std::string> targets;
  for (const auto& t : mutation_targets(f, c, g, vars, fig1().schema)) targets.push_back(t.path.to_string());
  EXPECT_EQ(targets, (std::vector<std::string>{"x", "y", "y.data", "y.next"}));

  std::vector<std::string> plan_x;
  for (const auto& m : plan({vars[0], vars[1]}, g, {}, fig1().schema)) plan_x.push_back(m.to_string());
  const NodeId y = *resolve(g, Path("y"));
  EXPECT_EQ(plan_x, (std::vector<std::string>{
                        "FreshObject(x: Node)",
                        "Repoint(x -> null)",
                        fmt::format("Repoint(x -> n{})", y),
                        "SwapRef(x, y)",
                        "FreshObject(y: Node)",
                        "Repoint(y -> null)",
                        fmt::format("Repoint(y -> n{})", y),
                    }));
  // Literal formulas mutate every variable.
  EXPECT_EQ(mutation_targets(FeatureFormula::truth(), c, g, vars, fig1().schema).size(), 4u);
}

TEST(Mutation, RefineTerminatesAndGrowsStrictlyOnTheCorpus) {
  for (const char* file : {"corpus/fig1.hl", "corpus/buggy.hl", "corpus/traverse.hl", "corpus/nested.hl",
                           "corpus/total.hl"}) {
    for (std::size_t rounds : {1, 2, 10}) {
      SCOPED_TRACE(fmt::format("{} rounds={}", file, rounds));
      VerifierConfig cfg;
      cfg.grid = std::make_pair(std::int64_t{0}, std::int64_t{2});
      cfg.mutation_rounds = rounds;
      cfg.relearn_budget = 0;
      auto p = loops_to_tailrec(load_program(file));
      Interpreter interp(p);
      auto tests = grid_tests(p, 0, 2);
      auto learned = learn_invariants(interp, tests, learning_points(p, 1), cfg);
      for (const auto& r : learned) {
        EXPECT_LE(r.rounds, rounds);
        ASSERT_EQ(r.growth.size(), r.rounds + 1);
        EXPECT_EQ(r.growth.front(), r.initial.rows.size());
        EXPECT_EQ(r.growth.back(), r.matrix.rows.size());
        // Every round but a final fixpoint round adds distinct rows.
        for (std::size_t i = 1; i + 1 < r.growth.size(); ++i) EXPECT_GT(r.growth[i], r.growth[i - 1]);
        if (r.growth.size() > 1) EXPECT_GE(r.growth.back(), r.growth[r.growth.size() - 2]);
        EXPECT_EQ(r.matrix.rows.size(), normalize(r.matrix).rows.size());
        if (r.budget_hit) EXPECT_EQ(r.rounds, rounds);
      }
    }
  }
}

TEST(Mutation, MutantsPerRoundCapIsRespected) {
  auto p = fig1();
  Interpreter interp(p);
  VerifierConfig cfg;
  cfg.mutants_per_round = 3;
  cfg.mutation_rounds = 2;
  auto tests = grid_tests(p, 0, 2);
  auto learned = learn_invariants(interp, tests, learning_points(p, 1), cfg);
  for (const auto& r : learned) EXPECT_LE(r.mutation_log.size(), 3 * r.rounds);
}

}  // namespace
}  // namespace slearner
