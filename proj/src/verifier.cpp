#include "slearner/verifier.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "slearner/loops.hpp"
#include "slearner/translate.hpp"

namespace slearner {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string root_of(const std::string& name) { return name.substr(0, name.find('.')); }

const ValueType* slot_type(const Program& p, const std::string& name) {
  const auto* v = find_var(p.main().slots, name);
  return v == nullptr ? nullptr : &v->type;
}

// Constructor functions: non-entry functions with integer parameters that
// return exactly one value of record type `record`.
std::vector<const Function*> constructors(const Program& p, const std::string& record) {
  std::vector<const Function*> out;
  for (std::size_t i = 0; i < p.functions.size(); ++i) {
    const auto& f = p.functions[i];
    if (static_cast<int>(i) == p.entry) continue;
    if (f.returns.size() != 1 || !f.returns[0].is_ref() || f.returns[0].record != record) continue;
    if (!std::all_of(f.params.begin(), f.params.end(),
                     [](const TypedVar& v) { return v.type.kind == ScalarKind::Int; })) {
      continue;
    }
    out.push_back(&f);
  }
  return out;
}

void add_vars(const Expr& e, std::set<std::string>& out) {
  std::vector<std::string> vs;
  expr_vars(e, vs);
  out.insert(vs.begin(), vs.end());
}

// Roots of every dereferenced base inside `e`.
void add_derefs(const Expr& e, std::set<std::string>& out) {
  if (e.kind == Expr::Kind::Field) add_vars(e.kids[0], out);
  for (const auto& k : e.kids) add_derefs(k, out);
}

void stmt_derefs(const Stmt& s, std::set<std::string>& out) {
  if (s.kind == Stmt::Kind::FieldWrite) add_vars(s.lhs, out);
  if (s.value) add_derefs(*s.value, out);
  for (const auto& a : s.args) add_derefs(a, out);
}

// Backward relevance: which variables before a statement list influence
// the postcondition, a call or a dereference after it.
struct Relevance {
  std::set<std::string> live;

  void block(const std::vector<Stmt>& stmts) {
    for (auto it = stmts.rbegin(); it != stmts.rend(); ++it) stmt(*it);
  }

  void kill_gen(const std::vector<std::string>& targets, const std::set<std::string>& uses) {
    bool needed = std::any_of(targets.begin(), targets.end(), [&](const std::string& t) { return live.contains(t); });
    for (const auto& t : targets) live.erase(t);
    if (needed) live.insert(uses.begin(), uses.end());
  }

  void stmt(const Stmt& s) {
    std::set<std::string> uses;
    switch (s.kind) {
      case Stmt::Kind::VarDecl:
      case Stmt::Kind::Assign:
        if (s.value) add_vars(*s.value, uses);
        kill_gen(s.targets, uses);
        break;
      case Stmt::Kind::New:
        for (const auto& a : s.args) add_vars(a, uses);
        kill_gen(s.targets, uses);
        break;
      case Stmt::Kind::Call:
        for (const auto& t : s.targets) live.erase(t);
        for (const auto& a : s.args) add_vars(a, live);
        break;
      case Stmt::Kind::FieldWrite:
        add_vars(s.lhs, live);
        add_vars(*s.value, live);
        break;
      case Stmt::Kind::If: {
        Relevance a{live};
        Relevance b{live};
        a.block(s.body);
        b.block(s.else_body);
        live.insert(a.live.begin(), a.live.end());
        live.insert(b.live.begin(), b.live.end());
        add_vars(*s.value, live);
        break;
      }
      case Stmt::Kind::While:
        while (true) {
          auto before = live;
          Relevance body{live};
          body.block(s.body);
          live.insert(body.live.begin(), body.live.end());
          add_vars(*s.value, live);
          if (live == before) break;
        }
        break;
      case Stmt::Kind::Return:
        for (const auto& a : s.args) add_vars(a, live);
        break;
      case Stmt::Kind::Assert:
      case Stmt::Kind::Assume: {
        auto roots = free_roots(s.formula);
        live.insert(roots.begin(), roots.end());
        break;
      }
      case Stmt::Kind::Havoc:
        live.erase(s.targets[0]);
        break;
    }
    stmt_derefs(s, live);
  }
};

void collect_preds(const Formula& f, std::set<std::string>& out) {
  for (const auto& h : f.disjuncts) {
    if (!h.spatial) continue;
    for (const auto& a : *h.spatial) {
      if (a.kind == SpatialAtom::Kind::Pred) out.insert(a.name);
    }
  }
}

void collect_preds(const std::vector<Stmt>& stmts, std::set<std::string>& out) {
  for (const auto& s : stmts) {
    if (s.kind == Stmt::Kind::Assert || s.kind == Stmt::Kind::Assume) collect_preds(s.formula, out);
    collect_preds(s.body, out);
    collect_preds(s.else_body, out);
  }
}

// Variables read by statements [first, last) of the entry function, and
// those they declare.
struct SegmentVars {
  std::set<std::string> used;
  std::set<std::string> declared;
  std::vector<std::string> assigned;

  void stmt(const Stmt& s) {
    if (s.declares || s.kind == Stmt::Kind::VarDecl) declared.insert(s.targets.begin(), s.targets.end());
    for (const auto& t : s.targets) {
      if (std::find(assigned.begin(), assigned.end(), t) == assigned.end()) assigned.push_back(t);
    }
    if (s.kind == Stmt::Kind::FieldWrite) add_vars(s.lhs, used);
    if (s.value) add_vars(*s.value, used);
    for (const auto& a : s.args) add_vars(a, used);
    if (s.kind == Stmt::Kind::Assert || s.kind == Stmt::Kind::Assume) {
      auto roots = free_roots(s.formula);
      used.insert(roots.begin(), roots.end());
    }
    for (const auto& b : s.body) stmt(b);
    for (const auto& b : s.else_body) stmt(b);
  }
};

SegmentVars segment_vars(const Program& p, std::size_t first, std::size_t last) {
  SegmentVars v;
  for (std::size_t i = first; i < last; ++i) v.stmt(p.main().body[i]);
  return v;
}

std::string trim_code(const std::string& s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (c == '\n' || c == ' ') {
      space = !out.empty();
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

// Formula at a segment boundary; `end` selects the postcondition when the
// boundary is both the first and the last gap (empty body).
Formula anchor_formula(const Program& p, const std::map<std::size_t, Formula>& inv, std::size_t gap, bool end) {
  const auto& main = p.main();
  if (gap == main.body.size() && (end || gap > 0)) return main.ensures.value_or(Formula::truth());
  if (gap == 0) return main.requires_.value_or(Formula::truth());
  return inv.at(gap);
}

SymbolicHeap elide_heap(const SymbolicHeap& h, const std::set<std::string>& removed) {
  SymbolicHeap out;
  std::set<std::string> kept_args;
  std::set<std::string> dropped_args;
  if (h.spatial) {
    std::vector<SpatialAtom> kept;
    for (const auto& a : *h.spatial) {
      std::string root = a.kind == SpatialAtom::Kind::PointsTo ? a.root
                         : (!a.args.empty() && a.args[0].kind == Arg::Kind::Var) ? a.args[0].name
                                                                                 : std::string();
      bool drop = !root.empty() && removed.contains(root_of(root));
      auto& bucket = drop ? dropped_args : kept_args;
      for (const auto& arg : a.args) {
        if (arg.kind == Arg::Kind::Var) bucket.insert(arg.name);
      }
      if (!drop) kept.push_back(a);
    }
    if (kept.empty() && !h.spatial->empty()) {
      out.spatial = std::nullopt;
    } else {
      out.spatial = std::move(kept);
    }
  }
  std::set<std::string> gone = removed;
  for (const auto& e : h.exists) {
    if (dropped_args.contains(e) && !kept_args.contains(e)) gone.insert(e);
  }
  for (const auto& e : h.exists) {
    if (!gone.contains(e)) out.exists.push_back(e);
  }
  for (const auto& a : h.pure) {
    bool mentions = false;
    if (a.kind == PureAtom::Kind::NullTest) mentions = gone.contains(root_of(a.var));
    for (const auto& [v, c] : a.expr.coeffs) mentions |= gone.contains(root_of(v));
    if (!mentions) out.pure.push_back(a);
  }
  return out;
}

std::vector<std::int64_t> range_values(std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> v;
  for (auto x = lo; x <= hi; ++x) v.push_back(x);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string TestCase::to_string() const {
  std::vector<std::string> parts;
  for (const auto& i : inputs) parts.push_back(i.to_string());
  return fmt::format("({})", fmt::join(parts, ", "));
}

std::vector<TestCase> generate_tests(const Program& p, std::size_t n, std::uint64_t seed, std::int64_t bound) {
  const auto& params = p.main().params;
  if (params.empty()) return {TestCase{}};
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> num(-bound, bound);
  std::vector<TestCase> out;
  for (std::size_t t = 0; t < n; ++t) {
    TestCase tc;
    for (const auto& v : params) {
      switch (v.type.kind) {
        case ScalarKind::Int: tc.inputs.push_back(InputValue::integer(num(rng))); break;
        case ScalarKind::Bool: tc.inputs.push_back(InputValue::integer(static_cast<std::int64_t>(rng() % 2))); break;
        case ScalarKind::Ref: {
          auto ctors = constructors(p, v.type.record);
          auto pick = rng() % (ctors.size() + 1);
          if (pick == 0) {
            tc.inputs.push_back(InputValue::null());
          } else {
            const Function* f = ctors[pick - 1];
            std::vector<std::int64_t> args;
            for (std::size_t i = 0; i < f->params.size(); ++i) args.push_back(num(rng));
            tc.inputs.push_back(InputValue::construct(f->name, std::move(args)));
          }
          break;
        }
      }
    }
    out.push_back(std::move(tc));
  }
  return out;
}

std::vector<TestCase> grid_tests(const Program& p, std::int64_t lo, std::int64_t hi) {
  std::vector<TestCase> out(1);
  const auto values = range_values(lo, hi);
  for (const auto& v : p.main().params) {
    std::vector<InputValue> choices;
    switch (v.type.kind) {
      case ScalarKind::Int:
        for (auto x : values) choices.push_back(InputValue::integer(x));
        break;
      case ScalarKind::Bool:
        choices = {InputValue::integer(0), InputValue::integer(1)};
        break;
      case ScalarKind::Ref: {
        choices.push_back(InputValue::null());
        for (const Function* f : constructors(p, v.type.record)) {
          std::vector<std::vector<std::int64_t>> argsets(1);
          for (std::size_t i = 0; i < f->params.size(); ++i) {
            std::vector<std::vector<std::int64_t>> next;
            for (const auto& a : argsets) {
              for (auto x : values) {
                auto b = a;
                b.push_back(x);
                next.push_back(std::move(b));
              }
            }
            argsets = std::move(next);
          }
          for (auto& a : argsets) choices.push_back(InputValue::construct(f->name, a));
        }
        break;
      }
    }
    std::vector<TestCase> next;
    for (const auto& tc : out) {
      for (const auto& c : choices) {
        auto t = tc;
        t.inputs.push_back(c);
        next.push_back(std::move(t));
      }
    }
    out = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::string> relevant_vars(const Program& p, std::size_t gap) {
  const auto& main = p.main();
  Relevance r;
  if (main.ensures) {
    auto roots = free_roots(*main.ensures);
    r.live.insert(roots.begin(), roots.end());
    r.live.erase("res");
  }
  for (std::size_t i = main.body.size(); i > gap; --i) r.stmt(main.body[i - 1]);

  std::set<std::string> visible;
  for (const auto& v : main.params) visible.insert(v.name);
  for (std::size_t i = 0; i < gap && i < main.body.size(); ++i) {
    const auto& s = main.body[i];
    if (s.declares || s.kind == Stmt::Kind::VarDecl) visible.insert(s.targets.begin(), s.targets.end());
  }
  std::vector<std::string> out;
  for (const auto& v : r.live) {
    if (visible.contains(v)) out.push_back(v);
  }
  return out;
}

std::vector<TypedPath> expand_paths(const Program& p, const std::vector<std::string>& vars, std::size_t k) {
  std::vector<TypedPath> out;
  std::function<void(const Path&, const ValueType&)> visit = [&](const Path& path, const ValueType& t) {
    out.push_back({path, t});
    if (!t.is_ref() || path.size() >= k) return;
    const auto* rec = p.schema.find(t.record);
    if (rec == nullptr) return;
    for (const auto& f : rec->fields) visit(path.extend(f.name), f.type);
  };
  for (const auto& v : vars) {
    const auto* t = slot_type(p, v);
    if (t != nullptr) visit(Path(v), *t);
  }
  return out;
}

std::vector<LearningPoint> learning_points(const Program& p, std::size_t deref_bound) {
  const auto& body = p.main().body;
  std::set<std::size_t> gaps;
  for (std::size_t i = 0; i < body.size(); ++i) {
    const auto& s = body[i];
    if (s.kind == Stmt::Kind::Call && s.callee_index != p.entry) {
      gaps.insert(i);
      gaps.insert(i + 1);
    }
  }
  std::vector<LearningPoint> out;
  for (auto g : gaps) {
    if (g == 0 || g == body.size()) continue;
    LearningPoint lp;
    lp.gap = g;
    lp.relevant = expand_paths(p, relevant_vars(p, g), deref_bound);
    if (lp.relevant.empty()) continue;
    lp.id = out.size() + 1;
    lp.location = fmt::format("gap {} (after line {})", g, body[g - 1].loc.line);
    out.push_back(std::move(lp));
  }
  return out;
}

std::vector<const PredicateDef*> spec_predicates(const Program& p, const PredicateRegistry& preds) {
  std::set<std::string> names;
  for (const auto& f : p.functions) {
    if (f.requires_) collect_preds(*f.requires_, names);
    if (f.ensures) collect_preds(*f.ensures, names);
    collect_preds(f.body, names);
  }
  std::vector<const PredicateDef*> out;
  for (const auto& n : names) {
    if (const auto* d = preds.find(n)) out.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------

void relearn_point(PointResult& r, const Interpreter& interp, const VerifierConfig& cfg) {
  const Program& p = interp.program();
  PointContext ctx;
  ctx.interp = &interp;
  ctx.gap = r.point.gap;
  ctx.catalog = &r.catalog;
  ctx.vars = r.point.relevant;
  ctx.consts = harvest_constants(p);
  ctx.snapshots = r.snapshots;

  MutationConfig mc;
  mc.rounds = cfg.mutation_rounds;
  mc.mutants_per_round = cfg.mutants_per_round;
  mc.run.step_budget = cfg.run_budget;
  mc.run.num_bound = IntRange{-cfg.num_bound, cfg.num_bound};
  mc.policy = cfg.policy;

  try {
    auto res = refine(ctx, r.matrix, mc);
    r.matrix = std::move(res.matrix);
    r.formula = std::move(res.formula);
    r.rounds = res.rounds;
    r.budget_hit = res.budget_hit;
    r.growth = std::move(res.growth);
    r.mutation_log = std::move(res.log);
    r.chosen.clear();
    r.regions.clear();
    if (r.formula.kind == FeatureFormula::Kind::Dnf) {
      r.chosen = choose(r.matrix);
      r.regions = combine(r.matrix, r.chosen);
    }
  } catch (const InsufficientFeatures& e) {
    throw InsufficientFeatures(fmt::format("learning point {} ({}): {}", r.point.id, r.point.location, e.what()));
  }
  std::set<std::string> reserved;
  for (const auto& v : p.main().slots) reserved.insert(v.name);
  r.invariant = simplify(translate(r.formula, r.catalog, p.schema, reserved));
}

std::vector<PointResult> learn_invariants(const Interpreter& interp, std::vector<TestCase>& tests,
                                          const std::vector<LearningPoint>& points, const VerifierConfig& cfg) {
  const Program& p = interp.program();
  RunOptions opts;
  opts.step_budget = cfg.run_budget;
  opts.num_bound = IntRange{-cfg.num_bound, cfg.num_bound};
  for (const auto& lp : points) opts.snapshot_gaps.push_back(lp.gap);

  std::map<std::size_t, std::vector<std::pair<MemoryGraph, Label>>> seen;
  for (auto& t : tests) {
    auto out = interp.run(t.inputs, opts);
    t.outcome = out.kind;
    for (auto& s : out.trace) seen[s.gap].emplace_back(std::move(s.graph), out.label());
  }

  const auto preds = spec_predicates(p, PredicateRegistry::builtin());
  const auto consts = harvest_constants(p);
  std::vector<PointResult> results;
  for (const auto& lp : points) {
    PointResult r;
    r.point = lp;
    std::vector<TypedPath> refs;
    std::vector<TypedPath> nums;
    for (const auto& v : lp.relevant) {
      if (v.type.is_ref()) {
        refs.push_back(v);
      } else if (v.type.kind == ScalarKind::Int) {
        nums.push_back(v);
      }
    }
    r.catalog = build_catalog(refs, nums, preds, consts, p.schema);
    r.initial.header = r.catalog.header();
    std::unordered_set<std::string> distinct;
    for (const auto& [g, label] : seen[lp.gap]) {
      if (distinct.insert(g.encode()).second) r.snapshots.push_back(g);
      auto row = evaluate(r.catalog, g);
      if (!r.initial.contains(row, label)) r.initial.add(std::move(row), label);
    }
    r.matrix = r.initial;
    relearn_point(r, interp, cfg);
    results.push_back(std::move(r));
  }
  return results;
}

// ---------------------------------------------------------------------------

std::string HoareObligation::to_string() const {
  return fmt::format("{{{}}} {} {{{}}}", print_formula(pre), code, print_formula(post));
}

Decomposition decompose(const Program& p, const std::map<std::size_t, Formula>& invariants) {
  const auto& main = p.main();
  const std::size_t n = main.body.size();
  std::vector<std::size_t> anchors{0};
  for (const auto& [g, f] : invariants) {
    if (g > 0 && g < n) anchors.push_back(g);
  }
  if (n > 0) anchors.push_back(n);
  if (anchors.size() == 1) anchors.push_back(0);

  Decomposition d;
  Program inst = p;
  std::vector<Stmt> body;
  for (std::size_t i = 0; i + 1 < anchors.size(); ++i) {
    HoareObligation ob;
    ob.index = i + 1;
    ob.first = anchors[i];
    ob.last = anchors[i + 1];
    ob.pre = anchor_formula(p, invariants, ob.first, false);
    ob.post = anchor_formula(p, invariants, ob.last, true);
    const bool single_call = ob.last - ob.first == 1 && main.body[ob.first].kind == Stmt::Kind::Call;
    if (single_call) {
      const auto& s = main.body[ob.first];
      ob.callee = s.callee;
      std::vector<std::string> args;
      for (const auto& a : s.args) args.push_back(print_expr(a));
      ob.args = args;
      ob.code = fmt::format("{}({})", s.callee, fmt::join(args, ", "));
      if (s.targets.size() == 1) {
        ob.bind_res = true;
        ob.post = substitute(ob.post, s.targets[0], "res");
      } else if (!s.targets.empty()) {
        ob.code = fmt::format("({}) = {}", fmt::join(s.targets, ", "), ob.code);
      }
    } else {
      std::string code;
      for (std::size_t k = ob.first; k < ob.last; ++k) code += print_stmt(main.body[k]);
      ob.code = ob.first == ob.last ? "skip" : trim_code(code);
    }
    d.obligations.push_back(std::move(ob));

    // assert pre; havoc targets; assume post;
    const auto& o = d.obligations.back();
    Stmt a;
    a.kind = Stmt::Kind::Assert;
    a.loc = o.first < n ? main.body[o.first].loc : main.loc;
    a.formula = o.pre;
    body.push_back(a);
    auto sv = segment_vars(p, o.first, o.last);
    for (const auto& t : sv.assigned) {
      if (sv.declared.contains(t)) {
        Stmt decl;
        decl.kind = Stmt::Kind::VarDecl;
        decl.loc = a.loc;
        decl.declares = true;
        decl.targets = {t};
        decl.decl_type = *slot_type(p, t);
        body.push_back(decl);
      }
      Stmt h;
      h.kind = Stmt::Kind::Havoc;
      h.loc = a.loc;
      h.targets = {t};
      body.push_back(h);
    }
    Stmt as;
    as.kind = Stmt::Kind::Assume;
    as.loc = a.loc;
    as.formula = anchor_formula(p, invariants, o.last, true);
    body.push_back(as);
  }
  inst.functions[static_cast<std::size_t>(inst.entry)].body = std::move(body);
  d.instrumented = print_program(inst);
  return d;
}

HoareObligation frame_elide(const HoareObligation& ob, const Program& p) {
  std::set<std::string> keep{"res"};
  if (!ob.callee.empty()) {
    const auto& s = p.main().body[ob.first];
    for (const auto& a : s.args) add_vars(a, keep);
  } else {
    auto sv = segment_vars(p, ob.first, ob.last);
    keep.insert(sv.used.begin(), sv.used.end());
    keep.insert(sv.assigned.begin(), sv.assigned.end());
  }
  std::set<std::string> removed;
  for (const auto* f : {&ob.pre, &ob.post}) {
    for (const auto& v : free_roots(*f)) {
      const auto* t = slot_type(p, v);
      if (t != nullptr && t->is_ref() && !keep.contains(v)) removed.insert(v);
    }
  }
  HoareObligation out = ob;
  if (removed.empty()) return out;
  for (auto* f : {&out.pre, &out.post}) {
    Formula g;
    for (const auto& h : f->disjuncts) g.disjuncts.push_back(elide_heap(h, removed));
    *f = simplify(g);
  }
  return out;
}

std::string obligation_file(const HoareObligation& ob) {
  std::string call;
  if (ob.bind_res) {
    call = fmt::format("call res = {}", ob.code);
  } else if (!ob.callee.empty()) {
    call = fmt::format("call {}", ob.code);
  } else {
    call = fmt::format("exec {}", ob.code);
  }
  return fmt::format("requires {}\n{}\nensures {}\n", print_formula(ob.pre), call, print_formula(ob.post));
}

std::vector<TypedVar> state_vars(const HoareObligation& ob, const Program& p) {
  std::set<std::string> names;
  for (const auto& v : free_roots(ob.pre)) names.insert(v);
  auto sv = segment_vars(p, ob.first, ob.last);
  names.insert(sv.used.begin(), sv.used.end());
  for (const auto& v : free_roots(ob.post)) names.insert(v);
  names.erase("res");
  std::vector<TypedVar> out;
  for (const auto& n : names) {
    if (sv.declared.contains(n)) continue;
    if (const auto* t = slot_type(p, n)) out.push_back({n, *t});
  }
  return out;
}

void flag_dead_code(Decomposition& d, const Program& p, const VerifierConfig& cfg) {
  const ModelContext ctx{&p.schema, &PredicateRegistry::builtin(), IntRange{-cfg.num_bound, cfg.num_bound}};
  for (auto& ob : d.obligations) {
    GraphSpace space;
    space.schema = &p.schema;
    for (const auto& v : free_roots(ob.pre)) {
      if (const auto* t = slot_type(p, v)) space.vars.push_back({v, *t});
    }
    space.max_nodes = cfg.max_nodes;
    space.var_values = range_values(-cfg.num_bound, cfg.num_bound);
    space.field_values = {0, 1};
    ob.dead_code_suspect = !sat_bounded(ob.pre, space, ctx).has_value();
  }
}

// ---------------------------------------------------------------------------

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Passed: return "Passed";
    case Verdict::CounterExample: return "CounterExample";
    case Verdict::BudgetExhausted: return "BudgetExhausted";
  }
  return "?";
}

CheckResult check_bounded(const HoareObligation& ob, const Interpreter& interp, const VerifierConfig& cfg) {
  const auto start = Clock::now();
  const Program& p = interp.program();
  GraphSpace space;
  space.schema = &p.schema;
  space.vars = state_vars(ob, p);
  space.max_nodes = cfg.max_nodes;
  space.var_values = range_values(-cfg.num_bound, cfg.num_bound);
  space.field_values = {0, 1};
  const ModelContext ctx = interp.model_context(IntRange{-cfg.num_bound, cfg.num_bound});
  RunOptions ro;
  ro.step_budget = cfg.step_budget;
  ro.check_ensures = false;
  ro.num_bound = ctx.num_bound;

  enum class State : std::uint8_t { Skip, Ok, Violation, Budget };
  struct Detail {
    State state = State::Skip;
    OutcomeKind outcome = OutcomeKind::Normal;
    std::string message;
  };

  CheckResult result;
  std::vector<MemoryGraph> batch;
  constexpr std::size_t kBatch = 4096;
  bool stop = false;
  auto flush = [&] {
    std::vector<Detail> details(batch.size());
    auto bad = [&](std::size_t i) {
      auto& d = details[i];
      const auto& g = batch[i];
      if (!models(g, ob.pre, ctx)) return false;
      auto out = interp.run_fragment(ob.first, ob.last, g, ob.bind_res, ro);
      d.outcome = out.kind;
      if (out.kind == OutcomeKind::StepBudgetExceeded) {
        d.state = State::Budget;
        d.message = out.message;
        return true;
      }
      if (out.kind != OutcomeKind::Normal) {
        d.state = State::Violation;
        d.message = out.message;
        return true;
      }
      if (!models(*out.final_graph, ob.post, ctx)) {
        d.state = State::Violation;
        d.message = "postcondition does not hold";
        return true;
      }
      d.state = State::Ok;
      return false;
    };
    auto hit = first_match(batch.size(), bad, cfg.policy);
    const std::size_t upto = hit ? *hit + 1 : batch.size();
    result.states += upto;
    for (std::size_t i = 0; i < upto; ++i) {
      if (details[i].state != State::Skip) ++result.pre_states;
    }
    if (hit) {
      const auto& d = details[*hit];
      result.verdict = d.state == State::Budget ? Verdict::BudgetExhausted : Verdict::CounterExample;
      result.counterexample = batch[*hit];
      result.outcome = d.outcome;
      result.message = d.message;
      stop = true;
    }
    batch.clear();
  };
  enumerate_graphs(space, [&](const MemoryGraph& g) {
    batch.push_back(g);
    if (batch.size() >= kBatch) flush();
    if (!stop && result.states + batch.size() >= cfg.max_states) {
      flush();
      if (!stop) {
        result.verdict = Verdict::BudgetExhausted;
        result.message = fmt::format("state budget of {} exhausted", cfg.max_states);
        stop = true;
      }
    }
    return !stop;
  });
  if (!stop) flush();
  result.seconds = seconds_since(start);
  return result;
}

// ---------------------------------------------------------------------------

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Verified: return "Verified";
    case Status::CounterExample: return "CounterExample";
    case Status::Inconclusive: return "Inconclusive";
    case Status::LimitExceeded: return "LimitExceeded";
  }
  return "?";
}

int exit_code(Status s) {
  switch (s) {
    case Status::Verified: return 0;
    case Status::CounterExample:
    case Status::Inconclusive: return 1;
    case Status::LimitExceeded: return 3;
  }
  return 1;
}

namespace {

std::map<std::size_t, Formula> invariant_map(const std::vector<PointResult>& learned) {
  std::map<std::size_t, Formula> m;
  for (const auto& r : learned) m[r.point.gap] = r.invariant;
  return m;
}

// Runs the counterexample concretely and adds its snapshots at the
// obligation's boundary points. Returns the indices of updated points.
std::vector<std::size_t> absorb_counterexample(std::vector<PointResult>& learned, const Interpreter& interp,
                                               const HoareObligation& ob, const MemoryGraph& state,
                                               const VerifierConfig& cfg) {
  RunOptions opts;
  opts.step_budget = cfg.run_budget;
  opts.num_bound = IntRange{-cfg.num_bound, cfg.num_bound};
  opts.snapshot_gaps = {ob.first, ob.last};
  auto out = interp.resume(ob.first, state, opts);
  std::vector<std::size_t> updated;
  for (const auto& s : out.trace) {
    for (std::size_t i = 0; i < learned.size(); ++i) {
      auto& r = learned[i];
      if (r.point.gap != s.gap) continue;
      auto row = evaluate(r.catalog, s.graph);
      if (r.matrix.contains(row, out.label())) continue;
      r.matrix.add(std::move(row), out.label());
      r.snapshots.push_back(s.graph);
      if (std::find(updated.begin(), updated.end(), i) == updated.end()) updated.push_back(i);
    }
  }
  return updated;
}

}  // namespace

Report verify(const Program& input, const VerifierConfig& cfg) {
  Report r;
  auto phase = Clock::now();
  auto lap = [&](const std::string& name) {
    r.timings.emplace_back(name, seconds_since(phase));
    phase = Clock::now();
  };

  auto prog = std::make_shared<Program>(loops_to_tailrec(input));
  r.program = prog;
  const Interpreter interp(*prog);
  lap("loops");

  r.tests = cfg.grid ? grid_tests(*prog, cfg.grid->first, cfg.grid->second)
                     : generate_tests(*prog, cfg.tests, cfg.seed, cfg.test_bound);
  r.points = learning_points(*prog, cfg.deref_bound);
  try {
    r.learned = learn_invariants(interp, r.tests, r.points, cfg);
  } catch (const InsufficientFeatures& e) {
    r.status = Status::Inconclusive;
    r.reason = e.what();
    return r;
  } catch (const LimitExceeded& e) {
    r.status = Status::LimitExceeded;
    r.reason = e.what();
    return r;
  }
  lap("learn");

  for (std::size_t round = 0;; ++round) {
    r.decomposition = decompose(*prog, invariant_map(r.learned));
    for (auto& ob : r.decomposition.obligations) ob = frame_elide(ob, *prog);
    flag_dead_code(r.decomposition, *prog, cfg);
    lap("decompose");

    r.checks.clear();
    const HoareObligation* failed = nullptr;
    const CheckResult* failed_check = nullptr;
    for (const auto& ob : r.decomposition.obligations) {
      r.checks.push_back(check_bounded(ob, interp, cfg));
      if (!failed && r.checks.back().verdict != Verdict::Passed) failed = &ob;
    }
    for (std::size_t i = 0; i < r.checks.size(); ++i) {
      if (r.checks[i].verdict != Verdict::Passed) {
        failed_check = &r.checks[i];
        break;
      }
    }
    lap("check");
    if (failed == nullptr) {
      r.status = Status::Verified;
      r.reason = "every obligation passed bounded checking";
      return r;
    }
    const Status fail_status =
        failed_check->verdict == Verdict::CounterExample ? Status::CounterExample : Status::Inconclusive;
    if (!failed_check->counterexample) {
      r.status = Status::LimitExceeded;
      r.reason = fmt::format("obligation {}: {}", failed->index, failed_check->message);
      return r;
    }
    if (round >= cfg.relearn_budget) {
      r.status = fail_status;
      r.reason = fmt::format("obligation {} still fails ({}) after {} relearn round(s)", failed->index,
                             failed_check->message, round);
      return r;
    }
    auto updated = absorb_counterexample(r.learned, interp, *failed, *failed_check->counterexample, cfg);
    if (updated.empty()) {
      r.status = fail_status;
      r.reason = fmt::format("obligation {} fails ({}) and its counterexample adds no new feature vector",
                             failed->index, failed_check->message);
      return r;
    }
    try {
      for (auto i : updated) relearn_point(r.learned[i], interp, cfg);
    } catch (const InsufficientFeatures& e) {
      r.status = Status::Inconclusive;
      r.reason = e.what();
      return r;
    } catch (const LimitExceeded& e) {
      r.status = Status::LimitExceeded;
      r.reason = e.what();
      return r;
    }
    ++r.relearn_rounds;
    lap("relearn");
  }
}

std::string format_report(const Report& r) {
  std::string out;
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (const auto& t : r.tests) {
    if (auto l = t.label()) (*l == Label::Positive ? pos : neg)++;
  }
  out += fmt::format("tests: {} ({} positive, {} negative)\n", r.tests.size(), pos, neg);
  for (std::size_t i = 0; i < r.tests.size(); ++i) {
    const auto& t = r.tests[i];
    out += fmt::format("  t{} {} -> {}\n", i + 1, t.to_string(), t.outcome ? outcome_name(*t.outcome) : "not run");
  }
  for (const auto& p : r.learned) {
    std::vector<std::string> rel;
    for (const auto& v : p.point.relevant) rel.push_back(v.path.to_string());
    out += fmt::format("learning point {}: {}; relevant: {}\n", p.point.id, p.point.location, fmt::join(rel, ", "));
    out += fmt::format("  features: {}; rows: {} from tests, {} after mutation ({} round(s){})\n", p.catalog.size(),
                       p.initial.rows.size(), p.matrix.rows.size(), p.rounds,
                       p.budget_hit ? ", round budget hit" : "");
    if (p.formula.kind == FeatureFormula::Kind::Dnf) {
      std::vector<std::string> ks;
      for (auto k : p.chosen) ks.push_back(std::to_string(k + 1));
      out += fmt::format("  chosen: [{}]\n", fmt::join(ks, ","));
    }
    out += fmt::format("  learned: {}\n", p.formula.to_string(p.catalog.header()));
    out += fmt::format("  invariant: {}\n", print_formula(p.invariant));
  }
  if (!r.decomposition.obligations.empty()) out += "obligations:\n";
  for (std::size_t i = 0; i < r.decomposition.obligations.size(); ++i) {
    const auto& ob = r.decomposition.obligations[i];
    out += fmt::format("  {}. {}\n", ob.index, ob.to_string());
    if (ob.dead_code_suspect) out += "     precondition unsatisfiable within bounds (dead code suspect)\n";
    if (i < r.checks.size()) {
      const auto& c = r.checks[i];
      out += fmt::format("     {} (bounded); states {}, satisfying pre {}\n", verdict_name(c.verdict), c.states,
                         c.pre_states);
      if (c.counterexample) {
        out += fmt::format("     counterexample ({}{}{}):\n", outcome_name(c.outcome), c.message.empty() ? "" : ": ",
                           c.message);
        std::string dump = c.counterexample->dump();
        std::size_t start = 0;
        while (start < dump.size()) {
          auto end = dump.find('\n', start);
          out += "       " + dump.substr(start, end - start) + "\n";
          start = end + 1;
        }
      }
    }
  }
  out += fmt::format("relearn rounds: {}\n", r.relearn_rounds);
  out += fmt::format("status: {}{} - {}\n", status_name(r.status), r.status == Status::Verified ? " (bounded)" : "",
                     r.reason);
  return out;
}

}  // namespace slearner
