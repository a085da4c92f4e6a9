#include "slearner/predicates.hpp"

#include <algorithm>
#include <fmt/format.h>

namespace slearner {

std::optional<PredicateMatch> eval(const PredicateDef& pred, const MemoryGraph& graph,
                                   std::span<const NodeId> args) {
  if (args.size() != pred.ref_arity)
    throw Error(fmt::format("predicate {} expects {} reference argument(s), got {}", pred.name,
                            pred.ref_arity, args.size()));
  for (NodeId n : args)
    if (n >= graph.node_count()) throw Error("predicate argument outside graph");
  return pred.evaluator(graph, args);
}

void PredicateRegistry::add(PredicateDef pred) {
  if (frozen_) throw Error("predicate registry is frozen");
  if (preds_.contains(pred.name)) throw Error(fmt::format("predicate '{}' already registered", pred.name));
  std::string name = pred.name;
  preds_.emplace(std::move(name), std::move(pred));
}

const PredicateDef* PredicateRegistry::find(std::string_view name) const {
  auto it = preds_.find(name);
  return it == preds_.end() ? nullptr : &it->second;
}

std::vector<std::string> PredicateRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : preds_) out.push_back(k);
  return out;
}

PredicateRegistry PredicateRegistry::with_builtins() {
  PredicateRegistry r;
  r.add(predicates::sll());
  r.add(predicates::dll());
  r.add(predicates::sorted_sll());
  r.add(predicates::btree());
  return r;
}

const PredicateRegistry& PredicateRegistry::builtin() {
  static const PredicateRegistry r = [] {
    auto reg = with_builtins();
    reg.freeze();
    return reg;
  }();
  return r;
}

namespace predicates {
namespace {

bool self_ref_field(const Schema& s, const std::string& record, std::string_view field) {
  const RecordDecl* r = s.find(record);
  if (!r) return false;
  const FieldDecl* f = r->field(field);
  return f && f->type.is_ref() && f->type.record == record;
}

bool int_field(const Schema& s, const std::string& record, std::string_view field) {
  const RecordDecl* r = s.find(record);
  if (!r) return false;
  const FieldDecl* f = r->field(field);
  return f && f->type.kind == ScalarKind::Int;
}

// Adds `n` and its value nodes to the footprint.
void consume(const MemoryGraph& g, NodeId n, std::vector<NodeId>& fp) {
  fp.push_back(n);
  for (const auto& e : g.edges(n))
    if (g.is_value(e.target)) fp.push_back(e.target);
}

PredicateMatch finish(std::int64_t count, std::vector<NodeId> fp) {
  std::sort(fp.begin(), fp.end());
  return PredicateMatch{{count}, std::move(fp)};
}

// Walks `next` from `head`. Returns the chain, or nullopt on a cycle, a
// missing edge, or a node of another type.
std::optional<std::vector<NodeId>> chain(const MemoryGraph& g, NodeId head) {
  std::vector<NodeId> nodes;
  if (head == kNullNode) return nodes;
  if (!g.is_record(head)) return std::nullopt;
  const std::string& type = g.type(head);
  std::vector<char> seen(g.node_count(), 0);
  NodeId cur = head;
  while (cur != kNullNode) {
    if (!g.is_record(cur) || g.type(cur) != type || seen[cur]) return std::nullopt;
    seen[cur] = 1;
    nodes.push_back(cur);
    auto next = g.target(cur, "next");
    if (!next) return std::nullopt;
    cur = *next;
  }
  return nodes;
}

}  // namespace

PredicateDef sll() {
  PredicateDef p;
  p.name = "sll";
  p.ref_arity = 1;
  p.numeric_params = {"len"};
  p.evaluator = [](const MemoryGraph& g, std::span<const NodeId> args) -> std::optional<PredicateMatch> {
    auto nodes = chain(g, args[0]);
    if (!nodes) return std::nullopt;
    std::vector<NodeId> fp;
    for (NodeId n : *nodes) consume(g, n, fp);
    return finish(static_cast<std::int64_t>(nodes->size()), std::move(fp));
  };
  p.applies = [](const Schema& s, const std::string& r) { return self_ref_field(s, r, "next"); };
  return p;
}

PredicateDef dll() {
  PredicateDef p;
  p.name = "dll";
  p.ref_arity = 1;
  p.numeric_params = {"len"};
  p.evaluator = [](const MemoryGraph& g, std::span<const NodeId> args) -> std::optional<PredicateMatch> {
    auto nodes = chain(g, args[0]);
    if (!nodes) return std::nullopt;
    NodeId prev = kNullNode;
    for (NodeId n : *nodes) {
      auto back = g.target(n, "prev");
      if (!back || *back != prev) return std::nullopt;
      prev = n;
    }
    std::vector<NodeId> fp;
    for (NodeId n : *nodes) consume(g, n, fp);
    return finish(static_cast<std::int64_t>(nodes->size()), std::move(fp));
  };
  p.applies = [](const Schema& s, const std::string& r) {
    return self_ref_field(s, r, "next") && self_ref_field(s, r, "prev");
  };
  return p;
}

PredicateDef sorted_sll() {
  PredicateDef p;
  p.name = "sorted_sll";
  p.ref_arity = 1;
  p.numeric_params = {"len"};
  p.evaluator = [](const MemoryGraph& g, std::span<const NodeId> args) -> std::optional<PredicateMatch> {
    auto nodes = chain(g, args[0]);
    if (!nodes) return std::nullopt;
    std::optional<std::int64_t> last;
    for (NodeId n : *nodes) {
      auto d = g.target(n, "data");
      if (!d || !g.is_value(*d)) return std::nullopt;
      auto v = *g.value(*d);
      if (last && v < *last) return std::nullopt;
      last = v;
    }
    std::vector<NodeId> fp;
    for (NodeId n : *nodes) consume(g, n, fp);
    return finish(static_cast<std::int64_t>(nodes->size()), std::move(fp));
  };
  p.applies = [](const Schema& s, const std::string& r) {
    return self_ref_field(s, r, "next") && int_field(s, r, "data");
  };
  return p;
}

PredicateDef btree() {
  PredicateDef p;
  p.name = "btree";
  p.ref_arity = 1;
  p.numeric_params = {"size"};
  p.evaluator = [](const MemoryGraph& g, std::span<const NodeId> args) -> std::optional<PredicateMatch> {
    std::vector<NodeId> fp;
    const NodeId root = args[0];
    if (root == kNullNode) return finish(0, {});
    if (!g.is_record(root)) return std::nullopt;
    const std::string& type = g.type(root);
    std::vector<char> seen(g.node_count(), 0);
    std::vector<NodeId> stack{root};
    std::int64_t count = 0;
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      if (!g.is_record(n) || g.type(n) != type || seen[n]) return std::nullopt;
      seen[n] = 1;
      ++count;
      consume(g, n, fp);
      for (const char* f : {"right", "left"}) {
        auto c = g.target(n, f);
        if (!c) return std::nullopt;
        if (*c != kNullNode) stack.push_back(*c);
      }
    }
    return finish(count, std::move(fp));
  };
  p.applies = [](const Schema& s, const std::string& r) {
    return self_ref_field(s, r, "left") && self_ref_field(s, r, "right");
  };
  return p;
}

}  // namespace predicates
}  // namespace slearner
