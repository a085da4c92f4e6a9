#pragma once

// Deterministic interpreter for heaplang programs with learning-point
// snapshots and state (re)loading from memory graphs.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "slearner/common.hpp"
#include "slearner/heaplang.hpp"
#include "slearner/memgraph.hpp"
#include "slearner/speclang.hpp"

namespace slearner {

/// A test input for one parameter of the entry function.
struct InputValue {
  enum class Kind : std::uint8_t { Int, Null, Construct };
  Kind kind = Kind::Int;
  std::int64_t value = 0;
  /// Construct: constructor function and its integer arguments.
  std::string ctor;
  std::vector<std::int64_t> ctor_args;

  static InputValue integer(std::int64_t v) { return {Kind::Int, v, {}, {}}; }
  static InputValue null() { return {Kind::Null, 0, {}, {}}; }
  static InputValue construct(std::string f, std::vector<std::int64_t> args) {
    return {Kind::Construct, 0, std::move(f), std::move(args)};
  }
  std::string to_string() const;
  friend bool operator==(const InputValue&, const InputValue&) = default;
};

enum class OutcomeKind : std::uint8_t { Normal, MemoryError, PostViolation, StepBudgetExceeded };

std::string_view outcome_name(OutcomeKind k);
/// Normal is positive; every other outcome is negative.
Label outcome_label(OutcomeKind k);

struct Snapshot {
  /// Gap index in the entry function's top-level statement list.
  std::size_t gap = 0;
  MemoryGraph graph;
};

struct ExecutionOutcome {
  OutcomeKind kind = OutcomeKind::Normal;
  /// Final state (defined variables plus `res`); absent on budget exhaustion.
  std::optional<MemoryGraph> final_graph;
  SourceLoc error_loc;
  std::string message;
  std::vector<Snapshot> trace;
  std::size_t steps = 0;

  Label label() const { return outcome_label(kind); }
};

struct RunOptions {
  std::size_t step_budget = 100000;
  std::size_t max_depth = 1000;
  /// Gaps of the entry function at which snapshots are recorded.
  std::vector<std::size_t> snapshot_gaps;
  /// Check the entry function's `ensures` on completion.
  bool check_ensures = true;
  /// Numeric domain for existentials while checking `ensures`.
  IntRange num_bound{-8, 8};
};

/// Interpreter instances are immutable after construction and can be shared
/// across threads; every run uses its own machine state.
class Interpreter {
 public:
  explicit Interpreter(const Program& program, const PredicateRegistry* preds = &PredicateRegistry::builtin());
  /// The program is referenced, not copied; temporaries would dangle.
  explicit Interpreter(Program&&, const PredicateRegistry* = nullptr) = delete;

  /// Runs the entry function. Throws Error on input arity/type mismatch.
  ExecutionOutcome run(std::span<const InputValue> inputs, const RunOptions& opts) const;

  /// Re-enters the entry function at top-level gap `gap` with the state
  /// described by `state` and runs to completion.
  ExecutionOutcome resume(std::size_t gap, const MemoryGraph& state, const RunOptions& opts) const;

  /// Executes entry-function statements [first, last) from `state` without
  /// checking `ensures`. With `bind_res`, the single call statement's result
  /// goes to `res` instead of its targets. The final graph holds the
  /// defined variables (and `res`).
  ExecutionOutcome run_fragment(std::size_t first, std::size_t last, const MemoryGraph& state, bool bind_res,
                                const RunOptions& opts) const;

  const Program& program() const { return program_; }
  ModelContext model_context(IntRange num_bound) const;

 private:
  const Program& program_;
  const PredicateRegistry* preds_;
};

}  // namespace slearner
