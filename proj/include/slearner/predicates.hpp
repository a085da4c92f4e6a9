#pragma once

// Library of inductive shape predicates with concrete evaluators.
//
// A predicate is not interpreted from its inductive definition; each one
// ships a host-code evaluator that decides whether a memory graph rooted at
// the reference arguments has the shape, and if so reports the values of
// the predicate's numeric parameters and the nodes it consumes.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slearner/common.hpp"
#include "slearner/memgraph.hpp"

namespace slearner {

struct PredicateMatch {
  /// One value per numeric parameter, in declaration order.
  std::vector<std::int64_t> numerics;
  /// Non-null nodes consumed by the shape (records and their value nodes),
  /// ascending.
  std::vector<NodeId> footprint;
};

struct PredicateDef {
  using Evaluator =
      std::function<std::optional<PredicateMatch>(const MemoryGraph&, std::span<const NodeId>)>;
  using Applicability = std::function<bool(const Schema&, const std::string& record)>;

  std::string name;
  /// Number of reference parameters (they come first in applications).
  std::size_t ref_arity = 1;
  /// Numeric parameter names; `len` renders as `len_sll(x)` in features.
  std::vector<std::string> numeric_params;
  Evaluator evaluator;
  /// Whether a record type can be the root type of this shape.
  Applicability applies;

  std::size_t arity() const { return ref_arity + numeric_params.size(); }
};

/// Evaluates `pred` on `graph` with the given reference-argument nodes.
/// Throws Error on arity mismatch; ill-typed roots yield NoMatch.
std::optional<PredicateMatch> eval(const PredicateDef& pred, const MemoryGraph& graph,
                                   std::span<const NodeId> args);

class PredicateRegistry {
 public:
  /// Throws Error on a duplicate name or when the registry is frozen.
  void add(PredicateDef pred);
  const PredicateDef* find(std::string_view name) const;
  std::vector<std::string> names() const;

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  /// A fresh registry preloaded with sll, dll, sorted_sll and btree.
  static PredicateRegistry with_builtins();
  /// Shared frozen registry of the builtins.
  static const PredicateRegistry& builtin();

 private:
  std::map<std::string, PredicateDef, std::less<>> preds_;
  bool frozen_ = false;
};

namespace predicates {

/// null-terminated acyclic singly-linked list over field `next`; len = nodes.
PredicateDef sll();
/// Doubly-linked list over `next`/`prev` with head.prev = null and
/// consistent back-edges; len = nodes.
PredicateDef dll();
/// sll whose `data` fields are non-decreasing.
PredicateDef sorted_sll();
/// Binary tree over `left`/`right` without sharing; size = nodes.
PredicateDef btree();

}  // namespace predicates

}  // namespace slearner
