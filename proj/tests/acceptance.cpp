// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Expected values come from the literal tables below and from the
// oracles in oracles.hpp, never from the code under test.

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>

#include <fmt/format.h>

#include "oracles.hpp"
#include "slearner/loops.hpp"
#include "slearner/mutation.hpp"
#include "slearner/translate.hpp"
#include "slearner/verifier.hpp"
#include "support.hpp"
#include "table3.hpp"

namespace {

using namespace slearner;
using slearner::testing::load_program;
using slearner::testing::read_file;
using slearner::testing::source_path;
using Clock = std::chrono::steady_clock;

const char* const kInv1 = "x = null | exists a. sll(x,a) & a <= n";
const char* const kInv2 = "sll(x,_) * sll(y,_) & x = null | exists a,b. sll(x,a) * sll(y,b) & a <= b";

const char* const kTriples[] = {
    "{m <= n} createSLL(m) {res = null | exists a. sll(res,a) & a <= n}",
    "{true} createSLL(n) {sll(res,_)}",
    "{sll(x,_) * sll(y,_) & x = null | exists a,b. sll(x,a) * sll(y,b) & a <= b} getSum(x, y) {sll(x,_) * sll(y,_)}",
};

// Collects failure messages for one criterion.
struct Failures {
  std::vector<std::string> messages;

  void check(bool ok, const std::string& what) {
    if (!ok) messages.push_back(what);
  }
  bool empty() const { return messages.empty(); }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct CliResult {
  int exit = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  CliResult r;
  const std::string cmd = fmt::format("'{}' {} 2>/dev/null", SLEARNER_CLI, args);
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

const Program& fig1() {
  static const Program p = load_program("corpus/fig1.hl");
  return p;
}

const Schema& node_schema() {
  static const Schema s = [] {
    Schema t;
    t.add({"Node", {{"data", ValueType::integer()}, {"next", ValueType::ref("Node")}}});
    return t;
  }();
  return s;
}

FeatureCatalog list_pair_catalog() {
  std::vector<TypedPath> refs = {{Path("x"), ValueType::ref("Node")}, {Path("y"), ValueType::ref("Node")}};
  return build_catalog(refs, {}, std::vector<const PredicateDef*>{PredicateRegistry::builtin().find("sll")}, {},
                       node_schema());
}

std::vector<std::size_t> one_based(std::vector<std::size_t> v) {
  for (auto& k : v) ++k;
  return v;
}

std::string show(const std::vector<std::size_t>& v) { return fmt::format("[{}]", fmt::join(v, ",")); }

// Bounded semantic equivalence: every graph binding `vars` with at most
// four records and numerics in [-4, 4]. Returns a distinguishing graph dump,
// or an empty string.
std::string bounded_difference(const Formula& a, const Formula& b, std::vector<TypedVar> vars) {
  GraphSpace space;
  space.schema = &node_schema();
  space.vars = std::move(vars);
  space.max_nodes = 4;
  space.field_values = {0, 1};
  for (std::int64_t v = -4; v <= 4; ++v) space.var_values.push_back(v);
  ModelContext ctx{&node_schema(), &PredicateRegistry::builtin(), IntRange{-4, 4}};
  std::string diff;
  enumerate_graphs(space, [&](const MemoryGraph& g) {
    if (models(g, a, ctx) != models(g, b, ctx)) diff = g.dump();
    return diff.empty();
  });
  return diff;
}

const std::vector<TypedVar> kListPairVars = {{"x", ValueType::ref("Node")}, {"y", ValueType::ref("Node")}};

// ---------------------------------------------------------------------------

Failures catalog_fidelity() {
  Failures f;
  auto r = run_cli(fmt::format("features '{}' --point 2 --deref-bound 1", source_path("corpus/fig1.hl")));
  f.check(r.exit == 0, fmt::format("features exited with {}", r.exit));
  f.check(r.out == read_file("tests/golden/table2_features.txt"), "listing differs from the golden file:\n" + r.out);
  return f;
}

Failures vector_fidelity() {
  Failures f;
  const auto points = learning_points(fig1(), 1);
  if (points.size() != 2) {
    f.check(false, fmt::format("{} learning points", points.size()));
    return f;
  }
  const auto catalog = list_pair_catalog();
  const auto header = catalog.header();
  auto column = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("missing feature " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t sll_x = column("is_sll(x)");
  const std::size_t sll_y = column("is_sll(y)");
  const std::size_t both = column("is_sll(x) & is_sll(y) & sep(x,y)");
  const std::size_t lt = column("-len_sll(x) + len_sll(y) > 0");
  const std::size_t eq = column("len_sll(x) - len_sll(y) = 0");

  struct Row {
    std::int64_t m, n;
    bool is_sll_x, is_sll_y, sep_lists, len_le;
    Label label;
  };
  const Row table[] = {{1, 0, true, true, true, false, Label::Negative}, {0, 1, true, true, true, true, Label::Positive}};
  Interpreter interp(fig1());
  for (const auto& row : table) {
    RunOptions opts;
    opts.snapshot_gaps = {points[1].gap};
    std::vector<InputValue> in = {InputValue::integer(row.m), InputValue::integer(row.n)};
    auto out = interp.run(in, opts);
    const std::string tag = fmt::format("(m={}, n={})", row.m, row.n);
    f.check(outcome_label(out.kind) == row.label, tag + " label");
    if (out.trace.size() != 1) {
      f.check(false, tag + " was not snapshotted once");
      continue;
    }
    const auto& g = out.trace[0].graph;
    // Oracle values straight from the graph.
    const NodeId x = *resolve(g, Path("x"));
    const NodeId y = *resolve(g, Path("y"));
    auto ux = slearner::testing::sll_unfold(g, x, g.node_count() + 1);
    auto uy = slearner::testing::sll_unfold(g, y, g.node_count() + 1);
    const bool oracle_sep = slearner::testing::separated_by_reach(g, Path("x"), Path("y")) == Tri::One;
    f.check(ux.has_value() == row.is_sll_x && uy.has_value() == row.is_sll_y, tag + " oracle shapes");
    f.check((ux && uy && oracle_sep) == row.sep_lists, tag + " oracle separation");
    f.check(ux && uy && (ux->len <= uy->len) == row.len_le, tag + " oracle lengths");
    // Feature values.
    auto v = evaluate(catalog, g);
    f.check((v[sll_x] == Tri::One) == row.is_sll_x, tag + " is_sll(x)");
    f.check((v[sll_y] == Tri::One) == row.is_sll_y, tag + " is_sll(y)");
    f.check((v[both] == Tri::One) == row.sep_lists, tag + " is_sll(x) & is_sll(y) & sep(x,y)");
    f.check((v[lt] == Tri::One || v[eq] == Tri::One) == row.len_le, tag + " len_sll(x) <= len_sll(y)");
  }
  return f;
}

Failures small_learner() {
  Failures f;
  auto m = slearner::testing::table3(4);
  auto K = choose(m);
  f.check(one_based(K) == std::vector<std::size_t>{1, 4}, "choose returned " + show(one_based(K)));
  auto regions = combine(m, K);
  std::vector<std::vector<std::size_t>> got;
  for (const auto& r : regions) got.push_back(one_based(r.features));
  f.check(got == std::vector<std::vector<std::size_t>>{{1}, {4}}, "regions differ");
  const auto text = learn(m).to_string(list_pair_catalog().header());
  f.check(text == "x = null | y != null", "printed " + text);
  return f;
}

Failures full_learner() {
  Failures f;
  auto m = slearner::testing::table3();
  auto K = choose(m);
  f.check(!K.empty() && K[0] + 1 == 12, "first pick " + show(one_based(K)));

  auto regions = combine(m, {0, 11, 20, 23});
  std::vector<std::set<std::size_t>> got;
  for (const auto& r : regions) {
    auto one = one_based(r.features);
    got.emplace_back(one.begin(), one.end());
  }
  f.check(got == std::vector<std::set<std::size_t>>{{12, 1}, {12, 21}, {12, 24}}, "reference regions differ");

  auto dnf = learn(m);
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    f.check(dnf.holds(m.rows[i]) == (m.labels[i] == Label::Positive), fmt::format("row {} misclassified", i + 1));
  }
  auto inv = simplify(translate(dnf, list_pair_catalog(), node_schema(), {"x", "y"}));
  auto diff = bounded_difference(inv, parse_formula(kInv2), kListPairVars);
  f.check(diff.empty(), print_formula(inv) + " differs from the reference on\n" + diff);
  return f;
}

Failures convergence() {
  Failures f;
  VerifierConfig cfg;
  cfg.grid = std::make_pair(std::int64_t{0}, std::int64_t{2});
  const Program p = loops_to_tailrec(fig1());
  Interpreter interp(p);
  auto tests = grid_tests(p, 0, 2);
  auto learned = learn_invariants(interp, tests, learning_points(p, cfg.deref_bound), cfg);
  if (learned.size() != 2) {
    f.check(false, fmt::format("{} learning points", learned.size()));
    return f;
  }
  const auto node = ValueType::ref("Node");
  auto d1 = bounded_difference(learned[0].invariant, parse_formula(kInv1), {{"n", ValueType::integer()}, {"x", node}});
  f.check(d1.empty(), print_formula(learned[0].invariant) + " differs from inv1 on\n" + d1);
  auto d2 = bounded_difference(learned[1].invariant, parse_formula(kInv2), kListPairVars);
  f.check(d2.empty(), print_formula(learned[1].invariant) + " differs from inv2 on\n" + d2);
  return f;
}

// Wall time of the library verify on Fig. 1, for the determinism budget.
double g_verify_seconds = 0;

Failures end_to_end() {
  Failures f;
  VerifierConfig cfg;
  cfg.seed = 0;
  std::vector<double> times;
  Report r;
  for (int i = 0; i < 3; ++i) {
    auto start = Clock::now();
    r = verify(fig1(), cfg);
    times.push_back(seconds_since(start));
  }
  std::sort(times.begin(), times.end());
  g_verify_seconds = times[1];

  std::vector<std::string> got;
  for (const auto& ob : r.decomposition.obligations) got.push_back(ob.to_string());
  f.check(got == std::vector<std::string>(std::begin(kTriples), std::end(kTriples)),
          "obligations:\n" + fmt::format("{}", fmt::join(got, "\n")));
  f.check(r.checks.size() == got.size(), "not every obligation was checked");
  for (const auto& c : r.checks) {
    f.check(c.verdict == Verdict::Passed && c.states > 0, fmt::format("verdict {}", verdict_name(c.verdict)));
  }
  f.check(cfg.max_nodes == 5 && cfg.num_bound == 8, "bounds are not maxNodes=5, numerics [-8,8]");
  f.check(r.status == Status::Verified, fmt::format("status {}", status_name(r.status)));

  auto cli = run_cli(fmt::format("verify '{}' --seed 0 --emit sl", source_path("corpus/fig1.hl")));
  f.check(cli.exit == 0, fmt::format("verify exited with {}", cli.exit));
  for (std::size_t i = 0; i < r.decomposition.obligations.size(); ++i) {
    f.check(cli.out.find(obligation_file(r.decomposition.obligations[i])) != std::string::npos,
            fmt::format("CLI output lacks obligation {}", i + 1));
  }
  return f;
}

// -- property suites ---------------------------------------------------------

void random_matrices(Failures& f) {
  std::mt19937_64 rng(20240611);
  std::size_t cases = 0;
  for (std::size_t iter = 0; cases < 10000; ++iter) {
    auto m = slearner::testing::random_matrix(rng, 6, 6);
    if (m.positives() == 0 || m.negatives() == 0) continue;
    auto err = slearner::testing::check_learner(m);
    f.check(err.empty(), fmt::format("random matrix {}: {}", iter, err));
    if (!err.empty()) return;
    ++cases;
  }
}

GraphSpace list_pair_space() {
  GraphSpace space;
  space.schema = &node_schema();
  space.vars = kListPairVars;
  space.max_nodes = 4;
  space.field_values = {0, 1};
  return space;
}

void shape_oracles(Failures& f) {
  const auto& sll = *PredicateRegistry::builtin().find("sll");
  const std::vector<Path> paths = {Path("x"), Path("y"), Path::parse("x.next"), Path::parse("y.next")};
  std::size_t graphs = 0;
  enumerate_graphs(list_pair_space(), [&](const MemoryGraph& g) {
    ++graphs;
    for (const char* v : {"x", "y"}) {
      NodeId r = *resolve(g, Path(v));
      std::vector<NodeId> args{r};
      auto got = eval(sll, g, args);
      auto want = slearner::testing::sll_unfold(g, r, g.node_count() + 1);
      bool same = got.has_value() == want.has_value();
      if (same && got) {
        same = got->numerics == std::vector<std::int64_t>{want->len} &&
               got->footprint == std::vector<NodeId>(want->footprint.begin(), want->footprint.end());
      }
      f.check(same, "sll disagrees with unfolding on\n" + g.dump());
    }
    for (const auto& a : paths) {
      for (const auto& b : paths) {
        f.check(separated(g, a, b) == slearner::testing::separated_by_reach(g, a, b),
                fmt::format("separated({}, {}) disagrees on\n{}", a.to_string(), b.to_string(), g.dump()));
      }
    }
    return f.empty();
  });
  if (f.empty()) {
    f.check(graphs == count_graphs(list_pair_space()),
            fmt::format("enumeration stopped after {} graphs", graphs));
  }
}

const char* const kLearnableCorpus[] = {"corpus/fig1.hl",   "corpus/buggy.hl", "corpus/traverse.hl",
                                        "corpus/nested.hl", "corpus/total.hl", "corpus/empty.hl"};

void elision_never_flips(Failures& f) {
  VerifierConfig grid;
  grid.grid = std::make_pair(std::int64_t{0}, std::int64_t{2});
  for (const char* file : kLearnableCorpus) {
    auto r = verify(load_program(file), grid);
    if (!r.program) {
      f.check(false, fmt::format("{}: no program", file));
      continue;
    }
    const Program& p = *r.program;
    Interpreter interp(p);
    std::set<std::string> reserved;
    for (const auto& v : p.main().slots) reserved.insert(v.name);
    std::map<std::size_t, Formula> raw;
    for (const auto& l : r.learned) raw[l.point.gap] = translate(l.formula, l.catalog, p.schema, reserved);
    auto before = decompose(p, raw).obligations;
    if (before.size() != r.decomposition.obligations.size()) {
      f.check(false, fmt::format("{}: obligation count changed", file));
      continue;
    }
    for (std::size_t i = 0; i < before.size(); ++i) {
      if (check_bounded(before[i], interp, VerifierConfig{}).verdict != Verdict::Passed) continue;
      auto elided = check_bounded(frame_elide(before[i], p), interp, VerifierConfig{});
      f.check(elided.verdict == Verdict::Passed, fmt::format("{}: elision flips {}", file, before[i].to_string()));
      f.check(r.checks.at(i).verdict == Verdict::Passed,
              fmt::format("{}: simplification flips {}", file, before[i].to_string()));
    }
  }
}

void refine_terminates(Failures& f) {
  for (const char* file : kLearnableCorpus) {
    for (std::size_t rounds : {1, 2, 10}) {
      VerifierConfig cfg;
      cfg.grid = std::make_pair(std::int64_t{0}, std::int64_t{2});
      cfg.mutation_rounds = rounds;
      auto p = loops_to_tailrec(load_program(file));
      Interpreter interp(p);
      auto tests = grid_tests(p, 0, 2);
      for (const auto& r : learn_invariants(interp, tests, learning_points(p, 1), cfg)) {
        const std::string tag = fmt::format("{} point {} rounds={}", file, r.point.id, rounds);
        f.check(r.rounds <= rounds, tag + ": round budget exceeded");
        f.check(r.growth.size() == r.rounds + 1 && r.growth.back() == normalize(r.matrix).rows.size(),
                tag + ": growth log");
        for (std::size_t i = 1; i + 1 < r.growth.size(); ++i) {
          f.check(r.growth[i] > r.growth[i - 1], tag + ": a non-final round added no rows");
        }
      }
    }
  }
}

void loops_differential(Failures& f) {
  struct Case {
    const char* file;
    std::int64_t lo, hi;
  };
  const Case corpus[] = {{"corpus/fig1.hl", -2, 4},     {"corpus/buggy.hl", -2, 4},  {"corpus/total.hl", -2, 4},
                         {"corpus/empty.hl", 0, 0},     {"corpus/traverse.hl", -2, 8}, {"corpus/nested.hl", -2, 8},
                         {"corpus/search.hl", -2, 6},   {"corpus/spin.hl", 0, 0}};
  RunOptions opts;
  opts.step_budget = 100000;
  for (const auto& c : corpus) {
    Program p = load_program(c.file);
    Program q = loops_to_tailrec(p);
    f.check(count_loops(q) == 0, fmt::format("{}: loops remain", c.file));
    Interpreter a(p);
    Interpreter b(q);
    std::vector<std::string> vars;
    for (const auto& v : p.main().slots) vars.push_back(v.name);
    vars.push_back("res");
    const std::size_t arity = p.main().params.size();
    std::vector<std::int64_t> digits(arity, c.lo);
    while (true) {
      std::vector<InputValue> in;
      for (auto d : digits) in.push_back(InputValue::integer(d));
      auto x = a.run(in, opts);
      auto y = b.run(in, opts);
      bool same = x.kind == y.kind && x.final_graph.has_value() == y.final_graph.has_value();
      if (same && x.final_graph) same = x.final_graph->project(vars).encode() == y.final_graph->project(vars).encode();
      f.check(same, fmt::format("{}: outcomes differ on ({})", c.file, fmt::join(digits, ", ")));
      std::size_t k = 0;
      while (k < arity && ++digits[k] > c.hi) digits[k++] = c.lo;
      if (k == arity) break;
    }
  }
}

Failures properties() {
  Failures f;
  random_matrices(f);
  shape_oracles(f);
  elision_never_flips(f);
  refine_terminates(f);
  loops_differential(f);
  return f;
}

double g_determinism_slowest = 0;

Failures determinism() {
  Failures f;
  VerifierConfig cfg;
  cfg.seed = 0;
  std::vector<std::string> reports;
  for (int i = 0; i < 2; ++i) {
    auto start = Clock::now();
    reports.push_back(format_report(verify(fig1(), cfg)));
    g_determinism_slowest = std::max(g_determinism_slowest, seconds_since(start));
  }
  f.check(reports[0] == reports[1], "reports differ");
  f.check(g_determinism_slowest < 2 * g_verify_seconds,
          fmt::format("slowest run {:.3f}s exceeds twice the verify time {:.3f}s", g_determinism_slowest,
                      g_verify_seconds));
  auto a = run_cli(fmt::format("verify '{}' --seed 0", source_path("corpus/fig1.hl")));
  auto b = run_cli(fmt::format("verify '{}' --seed 0", source_path("corpus/fig1.hl")));
  f.check(a.exit == 0 && a.out == b.out && !a.out.empty(), "CLI reports differ");
  return f;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<Failures()> run;
};

}  // namespace

int main() {
  const Criterion criteria[] = {
      {1, "feature catalog fidelity", 1, catalog_fidelity},
      {2, "vector fidelity", 1, vector_fidelity},
      {3, "learner fidelity (small)", 1, small_learner},
      {4, "learner fidelity (full)", 10, full_learner},
      {5, "invariant convergence", 60, convergence},
      {6, "end-to-end bounded verification", 120, end_to_end},
      {7, "property suites", 600, properties},
      {8, "determinism", 240, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Failures f;
    auto start = Clock::now();
    try {
      f = c.run();
    } catch (const std::exception& e) {
      f.check(false, std::string("exception: ") + e.what());
    }
    const double t = seconds_since(start);
    f.check(t < c.limit_seconds, fmt::format("took {:.3f}s, limit {}s", t, c.limit_seconds));
    const bool ok = f.empty();
    failed += ok ? 0 : 1;
    std::cout << fmt::format("{} criterion {}: {} ({:.3f}s, limit {}s)\n", ok ? "PASS" : "FAIL", c.id, c.name, t,
                             c.limit_seconds);
    for (std::size_t i = 0; i < std::min<std::size_t>(f.messages.size(), 5); ++i) {
      std::cout << "    " << f.messages[i] << "\n";
    }
  }
  std::cout << fmt::format("{} of {} criteria passed\n", std::size(criteria) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
