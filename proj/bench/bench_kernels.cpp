// Serial reference kernels against their OpenMP counterparts on the
// running example's workloads.

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "slearner/kernels.hpp"
#include "slearner/verifier.hpp"

namespace {

using namespace slearner;

// Cyclic states make getSum loop; cap them like the bounded checker does.
RunOptions run_options() {
  RunOptions opts;
  opts.step_budget = 1000;
  return opts;
}

struct Workload {
  Program program;
  std::vector<MemoryGraph> states;
  FeatureCatalog catalog;
  LabeledMatrix matrix;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  HoareObligation obligation;

  Workload() {
    std::ifstream in(std::string(SLEARNER_SOURCE_DIR) + "/corpus/fig1.hl");
    std::ostringstream os;
    os << in.rdbuf();
    program = parse_program(os.str());

    GraphSpace space;
    space.schema = &program.schema;
    space.vars = {{"x", ValueType::ref("Node")}, {"y", ValueType::ref("Node")}};
    space.max_nodes = 5;
    space.field_values = {0, 1};
    enumerate_graphs(space, [&](const MemoryGraph& g) {
      states.push_back(g);
      return true;
    });

    std::vector<TypedPath> refs = {{Path("x"), ValueType::ref("Node")}, {Path("y"), ValueType::ref("Node")}};
    catalog = build_catalog(refs, {}, spec_predicates(program, PredicateRegistry::builtin()), {}, program.schema);
    Interpreter interp(program);
    auto outcomes = resume_all(interp, 2, states, run_options(), ExecPolicy::Serial);
    auto rows = evaluate_rows(catalog, states, ExecPolicy::Serial);
    matrix.header = catalog.header();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!matrix.contains(rows[i], outcomes[i].label())) matrix.add(rows[i], outcomes[i].label());
    }
    for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
      for (std::size_t j = 0; j < matrix.rows.size(); ++j) {
        if (matrix.labels[i] == Label::Positive && matrix.labels[j] == Label::Negative) pairs.emplace_back(i, j);
      }
    }
    // Replicate the pairs so the cut kernel has a realistic amount of work.
    auto base = pairs;
    for (int k = 0; k < 63; ++k) pairs.insert(pairs.end(), base.begin(), base.end());

    auto d = decompose(program, {{1, parse_formula("x = null | exists a. sll(x,a) & a <= n")},
                                 {2, parse_formula("sll(x,_) * sll(y,_) & x = null | "
                                                   "exists a,b. sll(x,a) * sll(y,b) & a <= b")}});
    obligation = d.obligations.at(2);
  }
};

const Workload& workload() {
  static const Workload w;
  return w;
}

ExecPolicy policy_of(const benchmark::State& s) { return s.range(0) == 0 ? ExecPolicy::Serial : ExecPolicy::Parallel; }

void BM_EvaluateRows(benchmark::State& s) {
  const auto& w = workload();
  for (auto _ : s) benchmark::DoNotOptimize(evaluate_rows(w.catalog, w.states, policy_of(s)));
  s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * w.states.size()));
}

void BM_CountCuts(benchmark::State& s) {
  const auto& w = workload();
  for (auto _ : s) benchmark::DoNotOptimize(count_cuts_kernel(w.matrix, w.pairs, policy_of(s)));
  s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * w.pairs.size()));
}

void BM_ResumeAll(benchmark::State& s) {
  const auto& w = workload();
  Interpreter interp(w.program);
  for (auto _ : s) benchmark::DoNotOptimize(resume_all(interp, 2, w.states, run_options(), policy_of(s)));
  s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * w.states.size()));
}

void BM_CheckBounded(benchmark::State& s) {
  const auto& w = workload();
  Interpreter interp(w.program);
  VerifierConfig cfg;
  cfg.policy = policy_of(s);
  for (auto _ : s) benchmark::DoNotOptimize(check_bounded(w.obligation, interp, cfg));
}

BENCHMARK(BM_EvaluateRows)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CountCuts)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ResumeAll)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CheckBounded)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
