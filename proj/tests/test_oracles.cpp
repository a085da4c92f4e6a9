#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <set>

#include "slearner/memgraph.hpp"
#include "slearner/predicates.hpp"
#include "oracles.hpp"

namespace slearner {
namespace {

Schema node_schema() {
  Schema s;
  s.add({"Node", {{"data", ValueType::integer()}, {"next", ValueType::ref("Node")}}});
  return s;
}

GraphSpace list_pair_space(const Schema& s, std::size_t max_nodes) {
  GraphSpace space;
  space.schema = &s;
  space.vars = {{"x", ValueType::ref("Node")}, {"y", ValueType::ref("Node")}};
  space.max_nodes = max_nodes;
  space.field_values = {0, 1};
  return space;
}

using testing::sll_unfold;

TEST(Oracles, SllMatchesRecursiveUnfoldingOnAllSmallGraphs) {
  auto s = node_schema();
  const auto& sll = *PredicateRegistry::builtin().find("sll");
  std::size_t graphs = 0;
  std::size_t lists = 0;
  enumerate_graphs(list_pair_space(s, 4), [&](const MemoryGraph& g) {
    ++graphs;
    for (const char* v : {"x", "y"}) {
      NodeId r = *resolve(g, Path(v));
      std::vector<NodeId> args{r};
      auto got = eval(sll, g, args);
      auto want = sll_unfold(g, r, g.node_count() + 1);
      EXPECT_EQ(got.has_value(), want.has_value()) << g.dump();
      if (got && want) {
        ++lists;
        EXPECT_EQ(got->numerics, std::vector<std::int64_t>{want->len});
        EXPECT_EQ(got->footprint, std::vector<NodeId>(want->footprint.begin(), want->footprint.end()));
      }
    }
    return !::testing::Test::HasFailure();
  });
  EXPECT_GT(graphs, 1000u);
  EXPECT_GT(lists, 100u);
}

TEST(Oracles, SeparationMatchesReachIntersectionOnAllSmallGraphs) {
  auto s = node_schema();
  const std::vector<Path> paths = {Path("x"), Path("y"), Path::parse("x.next"), Path::parse("y.next")};
  enumerate_graphs(list_pair_space(s, 4), [&](const MemoryGraph& g) {
    for (const auto& a : paths) {
      for (const auto& b : paths) {
        EXPECT_EQ(separated(g, a, b), testing::separated_by_reach(g, a, b)) << a.to_string() << " " << b.to_string() << "\n" << g.dump();
      }
    }
    return !::testing::Test::HasFailure();
  });
}

// Every assignment of the variables and fields over `n` explicitly
// numbered records, reduced to canonical encodings.
std::set<std::string> brute_force(const GraphSpace& space) {
  std::set<std::string> out;
  for (std::size_t n = 0; n <= space.max_nodes; ++n) {
    // Slots: each variable, then next and data of every record.
    const std::size_t refs = space.vars.size() + n;
    std::vector<std::size_t> choice(refs + n, 0);
    auto radix = [&](std::size_t i) { return i < refs ? n + 1 : space.field_values.size(); };
    while (true) {
      MemoryGraph g;
      std::vector<NodeId> recs;
      for (std::size_t i = 0; i < n; ++i) recs.push_back(g.add_record("Node"));
      auto ref_of = [&](std::size_t c) { return c == 0 ? kNullNode : recs[c - 1]; };
      for (std::size_t v = 0; v < space.vars.size(); ++v) g.set_edge(kInitNode, space.vars[v].name, ref_of(choice[v]));
      for (std::size_t i = 0; i < n; ++i) {
        g.set_edge(recs[i], "next", ref_of(choice[space.vars.size() + i]));
        g.set_edge(recs[i], "data", g.add_value("int", space.field_values[choice[refs + i]]));
      }
      out.insert(g.encode());
      std::size_t k = 0;
      while (k < choice.size() && ++choice[k] == radix(k)) choice[k++] = 0;
      if (k == choice.size()) break;
    }
  }
  return out;
}

TEST(Oracles, EnumerationYieldsEachCanonicalGraphExactlyOnce) {
  auto s = node_schema();
  for (std::size_t max_nodes : {0, 1, 2, 3, 4}) {
    SCOPED_TRACE(max_nodes);
    auto space = list_pair_space(s, max_nodes);
    std::vector<std::string> got;
    enumerate_graphs(space, [&](const MemoryGraph& g) {
      g.validate();
      got.push_back(g.encode());
      return true;
    });
    std::set<std::string> distinct(got.begin(), got.end());
    EXPECT_EQ(distinct.size(), got.size());
    EXPECT_EQ(distinct, brute_force(space));
    EXPECT_EQ(count_graphs(space), got.size());
  }
}

TEST(Oracles, CanonicalFormIsInvariantUnderRenumbering) {
  auto s = node_schema();
  std::size_t checked = 0;
  enumerate_graphs(list_pair_space(s, 3), [&](const MemoryGraph& g) {
    std::vector<NodeId> perm(g.node_count());
    for (NodeId i = 0; i < perm.size(); ++i) perm[i] = i;
    // Reverse every node but init and null.
    std::reverse(perm.begin() + 2, perm.end());
    auto h = g.permuted(perm);
    EXPECT_EQ(h.encode(), g.encode());
    EXPECT_EQ(h.canonical().dump(), g.canonical().dump());
    ++checked;
    return !::testing::Test::HasFailure();
  });
  EXPECT_GT(checked, 100u);
}

TEST(Oracles, PathsWithinBoundAreExactlyTheResolvablePaths) {
  auto s = node_schema();
  enumerate_graphs(list_pair_space(s, 3), [&](const MemoryGraph& g) {
    std::set<std::string> want;
    for (const char* v : {"x", "y"}) {
      want.insert(v);
      if (auto n = resolve(g, Path(v)); n && g.is_record(*n)) {
        want.insert(std::string(v) + ".data");
        want.insert(std::string(v) + ".next");
      }
    }
    std::set<std::string> got;
    for (const auto& p : variables_within_bound(g, 2)) got.insert(p.to_string());
    EXPECT_EQ(got, want) << g.dump();
    return !::testing::Test::HasFailure();
  });
}

TEST(Oracles, DoublyLinkedAndSortedListsOnHandBuiltGraphs) {
  Schema s;
  s.add({"D", {{"data", ValueType::integer()}, {"next", ValueType::ref("D")}, {"prev", ValueType::ref("D")}}});
  MemoryGraph g;
  auto a = g.add_record("D");
  auto b = g.add_record("D");
  g.set_edge(a, "data", g.add_value("int", 1));
  g.set_edge(b, "data", g.add_value("int", 2));
  g.set_edge(a, "next", b);
  g.set_edge(b, "next", kNullNode);
  g.set_edge(a, "prev", kNullNode);
  g.set_edge(b, "prev", a);
  g.set_edge(kInitNode, "x", a);
  const auto& reg = PredicateRegistry::builtin();
  std::vector<NodeId> args{a};
  auto dll = eval(*reg.find("dll"), g, args);
  ASSERT_TRUE(dll);
  EXPECT_EQ(dll->numerics, std::vector<std::int64_t>{2});
  EXPECT_TRUE(eval(*reg.find("sorted_sll"), g, args));
  g.set_edge(b, "prev", b);
  EXPECT_FALSE(eval(*reg.find("dll"), g, args));
  g.set_edge(b, "data", g.add_value("int", 0));
  EXPECT_FALSE(eval(*reg.find("sorted_sll"), g, args));
  EXPECT_TRUE(eval(*reg.find("sll"), g, args));
}

TEST(Oracles, TreesRejectSharing) {
  Schema s;
  s.add({"T", {{"left", ValueType::ref("T")}, {"right", ValueType::ref("T")}}});
  MemoryGraph g;
  auto r = g.add_record("T");
  auto l = g.add_record("T");
  g.set_edge(r, "left", l);
  g.set_edge(r, "right", kNullNode);
  g.set_edge(l, "left", kNullNode);
  g.set_edge(l, "right", kNullNode);
  const auto& tree = *PredicateRegistry::builtin().find("btree");
  std::vector<NodeId> args{r};
  auto m = eval(tree, g, args);
  ASSERT_TRUE(m);
  EXPECT_EQ(m->numerics, std::vector<std::int64_t>{2});
  g.set_edge(r, "right", l);
  EXPECT_FALSE(eval(tree, g, args));
}

}  // namespace
}  // namespace slearner
