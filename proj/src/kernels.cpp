#include "slearner/kernels.hpp"

#include <algorithm>
#include <exception>

namespace slearner {

namespace {

// Runs body(i) for i in [0, n), propagating the first exception (by index).
template <typename F>
void parallel_for(std::size_t n, ExecPolicy policy, F&& body) {
  if (policy == ExecPolicy::Serial || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  const auto count = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<FeatureVector> evaluate_rows(const FeatureCatalog& catalog, std::span<const MemoryGraph> graphs,
                                         ExecPolicy policy, const PredicateRegistry& preds) {
  std::vector<FeatureVector> rows(graphs.size());
  parallel_for(graphs.size(), policy, [&](std::size_t i) { rows[i] = evaluate(catalog, graphs[i], preds); });
  return rows;
}

std::vector<std::size_t> count_cuts_kernel(const LabeledMatrix& m,
                                           std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                           ExecPolicy policy) {
  const std::size_t cols = m.columns();
  std::vector<std::size_t> cuts(cols, 0);
  parallel_for(cols, policy, [&](std::size_t k) {
    std::size_t c = 0;
    for (auto [i, j] : pairs) {
      if (m.rows[i][k] == Tri::One && m.rows[j][k] == Tri::Zero) ++c;
    }
    cuts[k] = c;
  });
  return cuts;
}

std::vector<ExecutionOutcome> resume_all(const Interpreter& interp, std::size_t gap,
                                         std::span<const MemoryGraph> states, const RunOptions& opts,
                                         ExecPolicy policy) {
  std::vector<ExecutionOutcome> out(states.size());
  parallel_for(states.size(), policy, [&](std::size_t i) { out[i] = interp.resume(gap, states[i], opts); });
  return out;
}

std::optional<std::size_t> first_match(std::size_t n, const std::function<bool(std::size_t)>& bad, ExecPolicy policy,
                                       std::size_t chunk) {
  chunk = std::max<std::size_t>(chunk, 1);
  if (policy == ExecPolicy::Serial) {
    for (std::size_t i = 0; i < n; ++i) {
      if (bad(i)) return i;
    }
    return std::nullopt;
  }
  for (std::size_t base = 0; base < n; base += chunk) {
    const std::size_t end = std::min(n, base + chunk);
    std::vector<char> hit(end - base, 0);
    parallel_for(end - base, policy, [&](std::size_t i) { hit[i] = bad(base + i) ? 1 : 0; });
    auto it = std::find(hit.begin(), hit.end(), 1);
    if (it != hit.end()) return base + static_cast<std::size_t>(it - hit.begin());
  }
  return std::nullopt;
}

}  // namespace slearner
