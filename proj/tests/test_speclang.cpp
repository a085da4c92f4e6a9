#include <gtest/gtest.h>

#include <random>

#include "slearner/speclang.hpp"

namespace slearner {
namespace {

Schema node_schema() {
  Schema s;
  s.add({"Node", {{"data", ValueType::integer()}, {"next", ValueType::ref("Node")}}});
  return s;
}

// x -> list of `lx` nodes, y -> list of `ly` nodes, disjoint.
MemoryGraph two_lists(std::size_t lx, std::size_t ly) {
  MemoryGraph g;
  for (auto [name, len] : {std::pair{"x", lx}, std::pair{"y", ly}}) {
    NodeId head = kNullNode;
    for (std::size_t i = 0; i < len; ++i) {
      auto n = g.add_record("Node");
      g.set_edge(n, "data", g.add_value("int", 0));
      g.set_edge(n, "next", head);
      head = n;
    }
    g.set_edge(kInitNode, name, head);
  }
  return g;
}

ModelContext context(const Schema& s) { return {&s, &PredicateRegistry::builtin(), IntRange{-4, 4}}; }

TEST(Speclang, PrintParseRoundTrip) {
  for (const char* text : {
           "true",
           "false",
           "emp",
           "x = null",
           "sll(x,_) * sll(y,_)",
           "sll(x,_) * sll(y,_) & x = null | exists a,b. sll(x,a) * sll(y,b) & a <= b",
           "x |-> Node(_,null) & y != null",
           "exists a. sll(res,a) & a <= n",
       }) {
    auto f = parse_formula(text);
    EXPECT_EQ(print_formula(f), text);
    EXPECT_EQ(print_formula(parse_formula(print_formula(f))), print_formula(f));
  }
}

TEST(Speclang, ErrorsCarryLocations) {
  try {
    parse_formula("sll(x,_) * ");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("1:"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_formula("nosuchpred(x)"), ParseError);
}

TEST(Speclang, SubstitutionAvoidsCapture) {
  auto f = parse_formula("exists a. sll(x,a) & a <= n");
  EXPECT_EQ(print_formula(substitute(f, "x", "res")), "exists a. sll(res,a) & a <= n");
  auto g = substitute(f, "n", "a");
  EXPECT_EQ(free_vars(g), (std::set<std::string>{"a", "x"}));
  EXPECT_EQ(free_roots(parse_formula("x.next = null & y = z")), (std::set<std::string>{"x", "y", "z"}));
}

TEST(Speclang, SimplifyMergesComparisonsAndDropsUnusedExistentials) {
  auto f = parse_formula("exists a,b. sll(x,a) * sll(y,b) & a < b | exists a,b. sll(x,a) * sll(y,b) & a = b");
  EXPECT_EQ(print_formula(simplify(f)), "exists a,b. sll(x,a) * sll(y,b) & a <= b");
  EXPECT_EQ(print_formula(simplify(parse_formula("exists a. sll(x,a) | x = null & x != null"))), "sll(x,_)");
  EXPECT_EQ(print_formula(simplify(parse_formula("x = null & x = null"))), "x = null");
}

TEST(Speclang, ModelsRequiresExactFootprint) {
  auto s = node_schema();
  auto ctx = context(s);
  auto g = two_lists(2, 1);
  EXPECT_TRUE(models(g, parse_formula("sll(x,_) * sll(y,_)"), ctx));
  EXPECT_TRUE(models(g, parse_formula("exists a,b. sll(x,a) * sll(y,b) & a = 2 & b = 1"), ctx));
  EXPECT_FALSE(models(g, parse_formula("exists a,b. sll(x,a) * sll(y,b) & a <= b"), ctx));
  // y's list is reachable but not covered.
  EXPECT_FALSE(models(g, parse_formula("sll(x,_) & y != null"), ctx));
  EXPECT_TRUE(models(g, parse_formula("x != null & y != null"), ctx));
  EXPECT_FALSE(models(g, parse_formula("emp & x != null"), ctx));
  EXPECT_TRUE(models(two_lists(0, 0), parse_formula("emp & x = null"), ctx));
  // Aliased lists overlap, so they cannot be separated.
  auto h = two_lists(1, 0);
  h.set_edge(kInitNode, "y", *resolve(h, Path("x")));
  EXPECT_FALSE(models(h, parse_formula("sll(x,_) * sll(y,_)"), ctx));
  EXPECT_TRUE(models(h, parse_formula("sll(x,_) & x = y"), ctx));
}

TEST(Speclang, BoundedSatisfiability) {
  auto s = node_schema();
  GraphSpace space;
  space.schema = &s;
  space.vars = {{"x", ValueType::ref("Node")}, {"y", ValueType::ref("Node")}};
  space.max_nodes = 3;
  auto ctx = context(s);
  auto m = sat_bounded(parse_formula("exists a. sll(x,a) & a = 3 & y = null"), space, ctx);
  ASSERT_TRUE(m);
  EXPECT_TRUE(models(*m, parse_formula("exists a. sll(x,a) & a = 3 & y = null"), ctx));
  EXPECT_FALSE(sat_bounded(parse_formula("exists a. sll(x,a) & a = 4"), space, ctx));
  EXPECT_FALSE(sat_bounded(parse_formula("x = null & x != null"), space, ctx));
}

// Random disjunctions over a small atom pool keep their models under
// simplification.
TEST(Speclang, SimplifyPreservesModels) {
  auto s = node_schema();
  auto ctx = context(s);
  GraphSpace space;
  space.schema = &s;
  space.vars = {{"x", ValueType::ref("Node")}, {"y", ValueType::ref("Node")}};
  space.max_nodes = 3;
  std::vector<MemoryGraph> graphs;
  enumerate_graphs(space, [&](const MemoryGraph& g) {
    graphs.push_back(g);
    return true;
  });

  const std::vector<std::string> spatial = {"",
                                            "emp",
                                            "sll(x,a)",
                                            "sll(x,a) * sll(y,b)",
                                            "sll(x,_) * sll(y,_)",
                                            "x |-> Node(_,_) * sll(y,b)",
                                            "sll(y,b)"};
  const std::vector<std::string> pure = {"x = null", "y != null", "a <= b", "a < b", "a = b", "x = y",
                                         "a = 1",    "b >= 1",    "x != y", "a <= 2"};
  std::mt19937_64 rng(11);
  std::size_t checked = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::string> disjuncts;
    const auto nd = 1 + rng() % 3;
    for (std::size_t d = 0; d < nd; ++d) {
      std::string sp = spatial[rng() % spatial.size()];
      std::vector<std::string> parts;
      if (!sp.empty()) parts.push_back(sp);
      const auto np = rng() % 3;
      for (std::size_t i = 0; i < np; ++i) parts.push_back(pure[rng() % pure.size()]);
      if (parts.empty()) parts.push_back("x = null");
      std::string body;
      for (std::size_t i = 0; i < parts.size(); ++i) body += (i ? " & " : "") + parts[i];
      const bool mentions_a = body.find('a') != std::string::npos;
      const bool mentions_b = body.find('b') != std::string::npos;
      if (mentions_a || mentions_b) body = "exists a,b. " + body;
      disjuncts.push_back(body);
    }
    std::string text;
    for (std::size_t i = 0; i < disjuncts.size(); ++i) text += (i ? " | " : "") + disjuncts[i];
    auto f = parse_formula(text);
    auto g = simplify(f);
    for (const auto& m : graphs) {
      ASSERT_EQ(models(m, f, ctx), models(m, g, ctx)) << text << "\n => " << print_formula(g) << "\n" << m.dump();
    }
    ++checked;
  }
  EXPECT_EQ(checked, 1000u);
}

}  // namespace
}  // namespace slearner
