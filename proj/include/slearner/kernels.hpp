#pragma once

// Data-parallel kernels with a serial reference implementation. Every
// parallel variant returns exactly what the serial one returns.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "slearner/features.hpp"
#include "slearner/interpreter.hpp"

namespace slearner {

enum class ExecPolicy : std::uint8_t { Serial, Parallel };

/// Feature vectors of `graphs`, in order.
std::vector<FeatureVector> evaluate_rows(const FeatureCatalog& catalog, std::span<const MemoryGraph> graphs,
                                         ExecPolicy policy, const PredicateRegistry& preds = PredicateRegistry::builtin());

/// Per-feature count of (positive, negative) pairs cut: M[i][k] = 1 and
/// M[j][k] = 0.
std::vector<std::size_t> count_cuts_kernel(const LabeledMatrix& m,
                                           std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                           ExecPolicy policy);

/// Resumes `interp` at `gap` from each state.
std::vector<ExecutionOutcome> resume_all(const Interpreter& interp, std::size_t gap,
                                         std::span<const MemoryGraph> states, const RunOptions& opts,
                                         ExecPolicy policy);

/// Smallest i in [0, n) with `bad(i)`, or nullopt. `bad` must be safe to
/// call concurrently. The parallel variant works in chunks of `chunk`
/// items and never reports a later index than the serial scan.
std::optional<std::size_t> first_match(std::size_t n, const std::function<bool(std::size_t)>& bad, ExecPolicy policy,
                                       std::size_t chunk = 256);

}  // namespace slearner
