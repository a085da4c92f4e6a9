#pragma once

// End-to-end pipeline: loops to tail recursion, test generation, invariant
// learning at learning points, decomposition into Hoare obligations, frame
// elision, bounded checking and counterexample-driven relearning.

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "slearner/features.hpp"
#include "slearner/heaplang.hpp"
#include "slearner/interpreter.hpp"
#include "slearner/kernels.hpp"
#include "slearner/learner.hpp"
#include "slearner/mutation.hpp"
#include "slearner/speclang.hpp"

namespace slearner {

// ---------------------------------------------------------------------------
// Tests

struct TestCase {
  std::vector<InputValue> inputs;
  std::optional<OutcomeKind> outcome;

  std::optional<Label> label() const {
    if (!outcome) return std::nullopt;
    return outcome_label(*outcome);
  }
  std::string to_string() const;
};

/// `n` random inputs: integers uniform in [-bound, bound]; reference
/// parameters are null or built by a constructor function (a non-entry
/// function with integer parameters returning that record type). A
/// program without parameters gets a single empty test.
std::vector<TestCase> generate_tests(const Program& p, std::size_t n, std::uint64_t seed, std::int64_t bound = 5);

/// Every integer input vector over [lo, hi]; reference parameters range over
/// null and each constructor applied to each grid value.
std::vector<TestCase> grid_tests(const Program& p, std::int64_t lo, std::int64_t hi);

// ---------------------------------------------------------------------------
// Learning points

struct LearningPoint {
  std::size_t id = 0;
  /// Gap in the entry function's top-level statement list.
  std::size_t gap = 0;
  std::vector<TypedPath> relevant;
  std::string location;
};

/// Entry-function variables relevant at `gap`: visible there and feeding
/// the postcondition, a later call, or a later dereference. Sorted.
std::vector<std::string> relevant_vars(const Program& p, std::size_t gap);

/// Type-directed expansion of variables to access paths of length <= k
/// (preorder, fields in declaration order).
std::vector<TypedPath> expand_paths(const Program& p, const std::vector<std::string>& vars, std::size_t k);

/// One point before and one after each top-level call to a non-entry
/// function, excluding the first and last gap (covered by requires/ensures)
/// and points without relevant variables.
std::vector<LearningPoint> learning_points(const Program& p, std::size_t deref_bound);

/// Predicates used by the program's specifications, by name.
std::vector<const PredicateDef*> spec_predicates(const Program& p, const PredicateRegistry& preds);

// ---------------------------------------------------------------------------
// Configuration

struct VerifierConfig {
  std::size_t deref_bound = 1;
  std::size_t tests = 10;
  std::uint64_t seed = 0;
  std::int64_t test_bound = 5;
  /// Integer grid for tests instead of random generation.
  std::optional<std::pair<std::int64_t, std::int64_t>> grid;
  std::size_t run_budget = 100000;
  std::size_t step_budget = 10000;
  std::size_t max_nodes = 5;
  std::int64_t num_bound = 8;
  std::size_t mutation_rounds = 10;
  std::size_t mutants_per_round = 500;
  std::size_t relearn_budget = 3;
  std::size_t max_states = 5000000;
  ExecPolicy policy = ExecPolicy::Parallel;
};

// ---------------------------------------------------------------------------
// Learning

struct PointResult {
  LearningPoint point;
  FeatureCatalog catalog;
  /// Matrix from test runs only, then after mutation.
  LabeledMatrix initial;
  LabeledMatrix matrix;
  std::vector<MemoryGraph> snapshots;
  std::vector<std::size_t> chosen;
  RegionSet regions;
  FeatureFormula formula;
  Formula invariant;
  std::size_t rounds = 0;
  bool budget_hit = false;
  std::vector<std::size_t> growth;
  std::vector<std::string> mutation_log;
};

/// Learns one point from `matrix` (rows aligned with the point's catalog).
void relearn_point(PointResult& r, const Interpreter& interp, const VerifierConfig& cfg);

/// Runs the tests (filling in outcomes) and learns every point. Throws
/// InsufficientFeatures naming the point.
std::vector<PointResult> learn_invariants(const Interpreter& interp, std::vector<TestCase>& tests,
                                          const std::vector<LearningPoint>& points, const VerifierConfig& cfg);

// ---------------------------------------------------------------------------
// Decomposition

struct HoareObligation {
  std::size_t index = 0;
  /// Entry-function statements [first, last).
  std::size_t first = 0;
  std::size_t last = 0;
  Formula pre;
  Formula post;
  /// Code of the triple, e.g. `createSLL(m)`.
  std::string code;
  /// Single-call obligations: the callee and its argument variables.
  std::string callee;
  std::vector<std::string> args;
  /// The call's single result is bound to `res` instead of its target.
  bool bind_res = false;
  /// The precondition has no model within bounds.
  bool dead_code_suspect = false;

  std::string to_string() const;
};

struct Decomposition {
  std::vector<HoareObligation> obligations;
  /// Entry function with each obligation's code replaced by
  /// `assert pre; havoc targets; assume post;`.
  std::string instrumented;
};

/// Splits the entry function at the gaps of `invariants` (gap -> formula).
/// Gap 0 uses `requires`, the last gap `ensures` (true when absent).
Decomposition decompose(const Program& p, const std::map<std::size_t, Formula>& invariants);

/// Drops the frame: spatial atoms rooted at reference variables that the
/// obligation's code cannot access, pure atoms over them and existentials
/// bound only by dropped atoms.
HoareObligation frame_elide(const HoareObligation& ob, const Program& p);

/// `.sl.txt` text: `requires ...`, `call ...`, `ensures ...` lines.
std::string obligation_file(const HoareObligation& ob);

/// Flags obligations whose precondition is unsatisfiable within bounds.
void flag_dead_code(Decomposition& d, const Program& p, const VerifierConfig& cfg);

// ---------------------------------------------------------------------------
// Bounded checking

enum class Verdict : std::uint8_t { Passed, CounterExample, BudgetExhausted };
std::string_view verdict_name(Verdict v);

struct CheckResult {
  Verdict verdict = Verdict::Passed;
  /// States enumerated and states satisfying the precondition.
  std::size_t states = 0;
  std::size_t pre_states = 0;
  std::optional<MemoryGraph> counterexample;
  OutcomeKind outcome = OutcomeKind::Normal;
  std::string message;
  double seconds = 0;
};

/// Typed state variables of an obligation: precondition roots, variables
/// read by its code and postcondition roots other than `res`.
std::vector<TypedVar> state_vars(const HoareObligation& ob, const Program& p);

/// Exhaustive check over every state with at most `max_nodes` records,
/// numerics in [-num_bound, num_bound] and int fields in {0, 1}.
CheckResult check_bounded(const HoareObligation& ob, const Interpreter& interp, const VerifierConfig& cfg);

// ---------------------------------------------------------------------------
// Whole pipeline

enum class Status : std::uint8_t { Verified, CounterExample, Inconclusive, LimitExceeded };
std::string_view status_name(Status s);
/// 0 verified, 1 counterexample/inconclusive, 3 limit.
int exit_code(Status s);

struct Report {
  Status status = Status::Inconclusive;
  std::string reason;
  std::shared_ptr<const Program> program;
  std::vector<TestCase> tests;
  std::vector<LearningPoint> points;
  std::vector<PointResult> learned;
  Decomposition decomposition;
  std::vector<CheckResult> checks;
  std::size_t relearn_rounds = 0;
  std::vector<std::pair<std::string, double>> timings;
};

Report verify(const Program& p, const VerifierConfig& cfg);

/// Deterministic human-readable report (no timings).
std::string format_report(const Report& r);

}  // namespace slearner
