#pragma once

// Memory-graph mutation at learning points: derive new states from the
// observed snapshots, run the program on from them, and feed the labeled
// feature vectors back into learning until the learned formula settles.

#include <cstdint>
#include <string>
#include <vector>

#include "slearner/features.hpp"
#include "slearner/interpreter.hpp"
#include "slearner/kernels.hpp"
#include "slearner/learner.hpp"

namespace slearner {

struct Mutation {
  enum class Kind : std::uint8_t { FreshObject, Repoint, SwapRef, SetConst, Offset, SwapNum };
  Kind kind = Kind::Repoint;
  Path target{std::string("x")};
  /// FreshObject: record type.
  std::string type;
  /// Repoint: destination node (kNullNode for null).
  NodeId node = kNullNode;
  /// SwapRef/SwapNum: the other path.
  Path other{std::string("x")};
  /// SetConst: constant; Offset: delta.
  std::int64_t value = 0;

  std::string to_string() const;
  friend bool operator==(const Mutation&, const Mutation&) = default;
};

/// Targets to mutate: the formula's variables (or every variable of
/// `vars` for a literal true/false formula) followed by their one-step
/// field extensions in `g`.
std::vector<TypedPath> mutation_targets(const FeatureFormula& formula, const FeatureCatalog& catalog,
                                        const MemoryGraph& g, const std::vector<TypedPath>& vars,
                                        const Schema& schema);

/// Mutations of `targets` applicable to `g`, in a fixed order. Reference
/// targets: FreshObject, Repoint(null), Repoint(each record of the type),
/// SwapRef(each other reference target of the type). Numeric targets:
/// SetConst(each constant), Offset(+1), Offset(-1), SwapNum(each other
/// numeric target).
std::vector<Mutation> plan(const std::vector<TypedPath>& targets, const MemoryGraph& g,
                           const std::vector<std::int64_t>& consts, const Schema& schema);

/// Convenience: plan over mutation_targets(formula, ...).
std::vector<Mutation> plan(const FeatureFormula& formula, const FeatureCatalog& catalog, const MemoryGraph& g,
                           const std::vector<TypedPath>& vars, const std::vector<std::int64_t>& consts,
                           const Schema& schema);

/// Applies `m` to a copy of `g`. Old nodes are kept (possibly unreachable).
/// Throws Error for an unresolvable target or a type-incompatible repoint.
MemoryGraph apply(const MemoryGraph& g, const Mutation& m, const Schema& schema);

struct MutationConfig {
  std::size_t rounds = 10;
  std::size_t mutants_per_round = 500;
  RunOptions run;
  ExecPolicy policy = ExecPolicy::Parallel;
};

struct RefineResult {
  FeatureFormula formula;
  LabeledMatrix matrix;
  std::size_t rounds = 0;
  /// Stopped on the round budget rather than by convergence.
  bool budget_hit = false;
  /// Distinct rows after each round (first entry: the input matrix).
  std::vector<std::size_t> growth;
  /// One line per mutant: `<snapshot>: <mutation> -> <outcome> [new]`.
  std::vector<std::string> log;
};

/// Learning-point context for refinement.
struct PointContext {
  const Interpreter* interp = nullptr;
  std::size_t gap = 0;
  const FeatureCatalog* catalog = nullptr;
  /// Variables eligible for mutation (the point's relevant paths).
  std::vector<TypedPath> vars;
  std::vector<std::int64_t> consts;
  /// Distinct snapshots observed at the point.
  std::vector<MemoryGraph> snapshots;
};

/// Learn, mutate every snapshot, resume, add the new distinct rows, repeat.
/// Stops when a round adds no new distinct row, when the formula is
/// unchanged across a round, or after `cfg.rounds` rounds.
RefineResult refine(const PointContext& point, LabeledMatrix matrix, const MutationConfig& cfg);

}  // namespace slearner
