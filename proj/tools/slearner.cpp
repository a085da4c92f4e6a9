// Command-line frontend: features | learn | decompose | verify.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "slearner/loops.hpp"
#include "slearner/verifier.hpp"

namespace {

using namespace slearner;

constexpr int kUserError = 2;

struct Options {
  std::string file;
  std::optional<std::uint64_t> seed;
  std::string grid;
  std::string emit = "report";
  std::string out_dir;
  std::string summary;
  std::size_t point = 0;
  bool timings = false;
  bool serial = false;
  VerifierConfig cfg;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot read '{}'", path));
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

// Parses `lo:hi`.
std::pair<std::int64_t, std::int64_t> parse_grid(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos) throw std::runtime_error("--grid expects lo:hi");
  auto lo = std::stoll(s.substr(0, colon));
  auto hi = std::stoll(s.substr(colon + 1));
  if (lo > hi) throw std::runtime_error("--grid expects lo <= hi");
  return {lo, hi};
}

std::string point_header(const LearningPoint& p) {
  std::vector<std::string> rel;
  for (const auto& v : p.relevant) rel.push_back(v.path.to_string());
  return fmt::format("# learning point {}: {}; relevant: {}", p.id, p.location, fmt::join(rel, ", "));
}

struct Learned {
  Program program;
  std::vector<TestCase> tests;
  std::vector<PointResult> points;
};

Learned learn_all(const Program& input, const VerifierConfig& cfg) {
  Learned l{loops_to_tailrec(input), {}, {}};
  Interpreter interp(l.program);
  l.tests = cfg.grid ? grid_tests(l.program, cfg.grid->first, cfg.grid->second)
                     : generate_tests(l.program, cfg.tests, cfg.seed, cfg.test_bound);
  l.points = learn_invariants(interp, l.tests, learning_points(l.program, cfg.deref_bound), cfg);
  return l;
}

int cmd_features(const Program& input, const Options& o) {
  Program p = loops_to_tailrec(input);
  const auto preds = spec_predicates(p, PredicateRegistry::builtin());
  const auto consts = harvest_constants(p);
  for (const auto& lp : learning_points(p, o.cfg.deref_bound)) {
    if (o.point != 0 && lp.id != o.point) continue;
    std::vector<TypedPath> refs;
    std::vector<TypedPath> nums;
    for (const auto& v : lp.relevant) {
      if (v.type.is_ref()) {
        refs.push_back(v);
      } else if (v.type.kind == ScalarKind::Int) {
        nums.push_back(v);
      }
    }
    auto catalog = build_catalog(refs, nums, preds, consts, p.schema);
    if (o.point == 0) std::cout << point_header(lp) << "\n";
    std::cout << catalog.listing();
  }
  return 0;
}

int cmd_learn(const Program& input, const Options& o) {
  auto l = learn_all(input, o.cfg);
  for (const auto& r : l.points) {
    if (o.point != 0 && r.point.id != o.point) continue;
    const std::string csv = r.matrix.to_csv();
    if (!o.out_dir.empty()) write_file(std::filesystem::path(o.out_dir) / fmt::format("point{}.csv", r.point.id), csv);
    if (o.emit == "csv") {
      if (o.point == 0) std::cout << point_header(r.point) << "\n";
      std::cout << csv;
      continue;
    }
    std::cout << point_header(r.point) << "\n";
    std::cout << "matrix:\n" << csv;
    if (r.formula.kind == FeatureFormula::Kind::Dnf) {
      std::cout << learn_report(r.matrix, r.chosen, r.regions);
    } else {
      std::cout << fmt::format("rows: {} ({} positive, {} negative)\nformula: {}\n", r.matrix.rows.size(),
                               r.matrix.positives(), r.matrix.negatives(), r.formula.to_string());
    }
    std::cout << "invariant: " << print_formula(r.invariant) << "\n";
  }
  return 0;
}

Decomposition elided_decomposition(const Learned& l, const VerifierConfig& cfg) {
  std::map<std::size_t, Formula> inv;
  for (const auto& r : l.points) inv[r.point.gap] = r.invariant;
  auto d = decompose(l.program, inv);
  for (auto& ob : d.obligations) ob = frame_elide(ob, l.program);
  flag_dead_code(d, l.program, cfg);
  return d;
}

int cmd_decompose(const Program& input, const Options& o) {
  auto l = learn_all(input, o.cfg);
  auto d = elided_decomposition(l, o.cfg);
  for (const auto& ob : d.obligations) {
    const std::string text = obligation_file(ob);
    if (!o.out_dir.empty()) {
      write_file(std::filesystem::path(o.out_dir) / fmt::format("obligation{}.sl.txt", ob.index), text);
    }
    std::cout << fmt::format("# obligation {}{}\n", ob.index, ob.dead_code_suspect ? " (dead code suspect)" : "");
    std::cout << text;
  }
  if (o.emit == "report") std::cout << "# instrumented program\n" << d.instrumented;
  return 0;
}

nlohmann::json summary_json(const Report& r) {
  nlohmann::json j;
  j["status"] = std::string(status_name(r.status));
  j["reason"] = r.reason;
  j["relearn_rounds"] = r.relearn_rounds;
  j["invariants"] = nlohmann::json::array();
  for (const auto& p : r.learned) {
    j["invariants"].push_back({{"point", p.point.id}, {"gap", p.point.gap}, {"invariant", print_formula(p.invariant)}});
  }
  j["obligations"] = nlohmann::json::array();
  for (std::size_t i = 0; i < r.decomposition.obligations.size(); ++i) {
    const auto& ob = r.decomposition.obligations[i];
    nlohmann::json rec{{"index", ob.index},
                       {"pre", print_formula(ob.pre)},
                       {"call", ob.code},
                       {"post", print_formula(ob.post)},
                       {"dead_code_suspect", ob.dead_code_suspect}};
    if (i < r.checks.size()) {
      rec["verdict"] = std::string(verdict_name(r.checks[i].verdict));
      rec["states"] = r.checks[i].states;
      rec["pre_states"] = r.checks[i].pre_states;
      rec["seconds"] = r.checks[i].seconds;
    }
    j["obligations"].push_back(rec);
  }
  return j;
}

int cmd_verify(const Program& input, const Options& o) {
  auto r = verify(input, o.cfg);
  if (o.emit == "sl") {
    for (const auto& ob : r.decomposition.obligations) std::cout << obligation_file(ob);
  } else {
    std::cout << format_report(r);
  }
  if (o.timings) {
    for (const auto& [phase, s] : r.timings) std::cerr << fmt::format("time {}: {:.3f}s\n", phase, s);
  }
  if (!o.out_dir.empty()) {
    for (const auto& ob : r.decomposition.obligations) {
      write_file(std::filesystem::path(o.out_dir) / fmt::format("obligation{}.sl.txt", ob.index),
                 obligation_file(ob));
    }
  }
  if (!o.summary.empty()) {
    const std::string text = summary_json(r).dump(2) + "\n";
    if (o.summary == "-") {
      std::cout << text;
    } else {
      write_file(o.summary, text);
    }
  }
  return exit_code(r.status);
}

void add_common(CLI::App* cmd, Options& o, bool seed_required) {
  cmd->add_option("file", o.file, "Program source (.hl)")->required()->check(CLI::ExistingFile);
  auto* seed = cmd->add_option("--seed", o.seed, "Random seed for test generation");
  if (seed_required) seed->required();
  cmd->add_option("--deref-bound", o.cfg.deref_bound, "Access-path length bound k")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--point", o.point, "Only this learning point (1-based)");
  if (!seed_required) return;
  cmd->add_option("--tests", o.cfg.tests, "Number of random tests")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--test-bound", o.cfg.test_bound, "Random integers are drawn from [-B, B]")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--grid", o.grid, "Exhaustive integer test grid lo:hi instead of random tests");
  cmd->add_option("--run-budget", o.cfg.run_budget, "Step budget per test run")->capture_default_str();
  cmd->add_option("--step-budget", o.cfg.step_budget, "Step budget per checked state")->capture_default_str();
  cmd->add_option("--max-nodes", o.cfg.max_nodes, "Bounded checking: records per state")->capture_default_str();
  cmd->add_option("--num-bound", o.cfg.num_bound, "Bounded checking: numerics in [-B, B]")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--mutation-rounds", o.cfg.mutation_rounds, "Mutation rounds per point")->capture_default_str();
  cmd->add_option("--mutants-per-round", o.cfg.mutants_per_round, "Mutants per round")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--relearn-budget", o.cfg.relearn_budget, "Counterexample relearn rounds")->capture_default_str();
  cmd->add_option("--out-dir", o.out_dir, "Directory for CSV matrices / obligation files")
      ->check(CLI::ExistingDirectory);
  cmd->add_flag("--serial", o.serial, "Use the serial reference kernels");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learns separation-logic invariants at call boundaries and checks the resulting obligations"};
  app.require_subcommand(1);
  Options o;
  auto* features = app.add_subcommand("features", "List the feature catalog of each learning point");
  add_common(features, o, false);
  auto* learn = app.add_subcommand("learn", "Learn invariants; print matrices, selections and formulas");
  add_common(learn, o, true);
  learn->add_option("--emit", o.emit, "report | csv")->check(CLI::IsMember({"report", "csv"}));
  auto* dec = app.add_subcommand("decompose", "Learn invariants and print the Hoare obligations (.sl.txt)");
  add_common(dec, o, true);
  dec->add_option("--emit", o.emit, "report | sl")->check(CLI::IsMember({"report", "sl"}));
  auto* ver = app.add_subcommand("verify", "Full pipeline with bounded checking and relearning");
  add_common(ver, o, true);
  ver->add_option("--emit", o.emit, "report | sl")->check(CLI::IsMember({"report", "sl"}));
  ver->add_option("--summary", o.summary, "Write a JSON summary to this path ('-' for stdout)");
  ver->add_flag("--timings", o.timings, "Print phase timings");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUserError;
  }

  try {
    if (o.seed) o.cfg.seed = *o.seed;
    if (!o.grid.empty()) o.cfg.grid = parse_grid(o.grid);
    if (o.serial) o.cfg.policy = ExecPolicy::Serial;
    Program p = parse_program(read_file(o.file));
    if (features->parsed()) return cmd_features(p, o);
    if (learn->parsed()) return cmd_learn(p, o);
    if (dec->parsed()) return cmd_decompose(p, o);
    return cmd_verify(p, o);
  } catch (const InsufficientFeatures& e) {
    std::cerr << "insufficient features: " << e.what() << "\n";
    return exit_code(Status::Inconclusive);
  } catch (const LimitExceeded& e) {
    std::cerr << "limit exceeded: " << e.what() << "\n";
    return exit_code(Status::LimitExceeded);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUserError;
  }
}
