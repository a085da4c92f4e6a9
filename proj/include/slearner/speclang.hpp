#pragma once

// Assertion language: disjunctions of existentially quantified symbolic
// heaps with a spatial part (points-to cells and predicate applications
// joined by `*`) and a pure part (linear integer constraints, null tests and
// reference (dis)equalities).
//
// Concrete syntax:
//   formula  ::= heap ('|' heap)*
//   heap     ::= ['exists' id (',' id)* '.'] conjunct ('&' conjunct)*
//   conjunct ::= spatial ('*' spatial)* | pure | 'true' | 'false'
//   spatial  ::= 'emp' | path '|->' Type '(' args ')' | Pred '(' args ')'
//   pure     ::= lin (= | == | != | < | <= | > | >=) lin | path (= | !=) null
//   arg      ::= path | '_' | 'null' | int

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "slearner/common.hpp"
#include "slearner/memgraph.hpp"
#include "slearner/predicates.hpp"

namespace slearner {

struct Arg {
  enum class Kind : std::uint8_t { Var, Wildcard, Null, Int };
  Kind kind = Kind::Wildcard;
  std::string name;
  std::int64_t value = 0;

  static Arg var(std::string n) { return {Kind::Var, std::move(n), 0}; }
  static Arg wildcard() { return {Kind::Wildcard, {}, 0}; }
  static Arg null() { return {Kind::Null, {}, 0}; }
  static Arg integer(std::int64_t v) { return {Kind::Int, {}, v}; }

  friend auto operator<=>(const Arg&, const Arg&) = default;
};

struct SpatialAtom {
  enum class Kind : std::uint8_t { PointsTo, Pred };
  Kind kind = Kind::Pred;
  /// Root variable of a points-to cell; unused for predicate applications.
  std::string root;
  /// Record type of a points-to cell, or the predicate name.
  std::string name;
  /// Points-to: one argument per field in declaration order.
  /// Predicate: reference arguments, then numeric arguments.
  std::vector<Arg> args;

  static SpatialAtom points_to(std::string root, std::string type, std::vector<Arg> args) {
    return {Kind::PointsTo, std::move(root), std::move(type), std::move(args)};
  }
  static SpatialAtom pred(std::string name, std::vector<Arg> args) {
    return {Kind::Pred, {}, std::move(name), std::move(args)};
  }

  friend auto operator<=>(const SpatialAtom&, const SpatialAtom&) = default;
};

enum class Cmp : std::uint8_t { Eq, Ne, Le, Lt };

/// sum(coeff * var) + constant.
struct LinearExpr {
  std::map<std::string, std::int64_t> coeffs;
  std::int64_t constant = 0;

  LinearExpr negated() const;
  friend auto operator<=>(const LinearExpr&, const LinearExpr&) = default;
};

/// Pure atom. `Linear` means `expr cmp 0`; an Eq/Ne between two reference
/// variables (coefficients +1/-1, constant 0) is pointer (dis)equality.
struct PureAtom {
  enum class Kind : std::uint8_t { Linear, NullTest, False };
  Kind kind = Kind::Linear;
  LinearExpr expr;
  Cmp cmp = Cmp::Eq;
  /// NullTest: the tested variable and whether it asserts `= null`.
  std::string var;
  bool is_null = true;

  static PureAtom linear(LinearExpr e, Cmp c) { return {Kind::Linear, std::move(e), c, {}, true}; }
  static PureAtom null_test(std::string v, bool is_null) {
    return {Kind::NullTest, {}, Cmp::Eq, std::move(v), is_null};
  }
  static PureAtom falsum() { return {Kind::False, {}, Cmp::Eq, {}, true}; }

  /// Canonical orientation: Lt/Le over `expr < 0`, Eq/Ne with the first
  /// coefficient positive.
  PureAtom normalized() const;

  friend auto operator<=>(const PureAtom&, const PureAtom&) = default;
};

struct SymbolicHeap {
  std::vector<std::string> exists;
  /// nullopt: no spatial constraint (any heap). Empty vector: `emp`.
  std::optional<std::vector<SpatialAtom>> spatial;
  std::vector<PureAtom> pure;

  friend auto operator<=>(const SymbolicHeap&, const SymbolicHeap&) = default;
};

struct Formula {
  std::vector<SymbolicHeap> disjuncts;

  static Formula truth() { return Formula{{SymbolicHeap{}}}; }
  static Formula falsity() { return Formula{}; }
  bool is_false() const { return disjuncts.empty(); }
  /// Syntactically `true`: a single unconstrained heap.
  bool is_true() const;

  friend auto operator<=>(const Formula&, const Formula&) = default;
};

/// Parses a formula. `base` offsets reported locations (for formulas
/// embedded in program sources). Predicate names are checked against
/// `preds` when given.
Formula parse_formula(std::string_view text, const PredicateRegistry* preds = &PredicateRegistry::builtin(),
                      SourceLoc base = {1, 1});
std::string print_formula(const Formula& f);
std::string print_heap(const SymbolicHeap& h);
std::string print_pure(const PureAtom& a);

/// Free variables (path roots excluded: `x.next` contributes `x.next`).
std::set<std::string> free_vars(const SymbolicHeap& h);
std::set<std::string> free_vars(const Formula& f);
/// Root variable names of the free paths.
std::set<std::string> free_roots(const Formula& f);

/// Capture-avoiding replacement of the free variable `from` (and paths
/// rooted at it) by `to`.
Formula substitute(const Formula& f, const std::string& from, const std::string& to);

/// Removes duplicate atoms and disjuncts, drops contradictory and unused
/// existentials, and merges sibling disjuncts differing only in
/// `L < 0` / `L = 0` into `L <= 0`.
Formula simplify(const Formula& f);

/// Satisfaction context.
struct ModelContext {
  const Schema* schema = nullptr;
  const PredicateRegistry* preds = &PredicateRegistry::builtin();
  /// Domain searched for existentials not fixed by a spatial atom.
  IntRange num_bound{-8, 8};
};

/// True iff some disjunct holds on `g`. Spatial atoms must have pairwise
/// disjoint footprints which together cover everything reachable from the
/// disjunct's free reference variables. Heaps without a spatial part leave
/// the heap unconstrained.
bool models(const MemoryGraph& g, const Formula& f, const ModelContext& ctx);
bool models(const MemoryGraph& g, const SymbolicHeap& h, const ModelContext& ctx);

/// Searches the graph space for a model; nullopt means Unsat within bounds.
std::optional<MemoryGraph> sat_bounded(const Formula& f, const GraphSpace& space, const ModelContext& ctx);

}  // namespace slearner
