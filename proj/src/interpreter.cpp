#include "slearner/interpreter.hpp"

#include <fmt/format.h>
#include <map>

namespace slearner {

std::string InputValue::to_string() const {
  switch (kind) {
    case Kind::Int: return std::to_string(value);
    case Kind::Null: return "null";
    case Kind::Construct: return fmt::format("{}({})", ctor, fmt::join(ctor_args, ","));
  }
  return "?";
}

std::string_view outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::Normal: return "normal";
    case OutcomeKind::MemoryError: return "memory-error";
    case OutcomeKind::PostViolation: return "post-violation";
    case OutcomeKind::StepBudgetExceeded: return "step-budget-exceeded";
  }
  return "?";
}

Label outcome_label(OutcomeKind k) { return k == OutcomeKind::Normal ? Label::Positive : Label::Negative; }

namespace {

constexpr std::int64_t kNull = -1;

std::int64_t wrap32(std::int64_t v) { return static_cast<std::int32_t>(static_cast<std::uint32_t>(v)); }

struct MemoryFault {
  SourceLoc loc;
  std::string message;
};
struct BudgetExhausted {
  std::string message;
};
struct AssertFailed {
  SourceLoc loc;
};
struct AssumeFailed {};

struct Object {
  int record;
  std::vector<std::int64_t> fields;
};

struct Frame {
  const Function* fn;
  std::vector<std::int64_t> vals;
  std::vector<char> defined;
  std::vector<std::int64_t> ret;
  bool has_res = false;
  std::int64_t res = 0;
  ValueType res_type;
};

enum class Flow { Next, Return };

class Machine {
 public:
  Machine(const Program& p, const PredicateRegistry* preds, const RunOptions& opts)
      : p_(p), preds_(preds), opts_(opts) {
    for (std::size_t i = 0; i < p.schema.records().size(); ++i) record_index_[p.schema.records()[i].name] = static_cast<int>(i);
  }

  Frame new_frame(const Function& f) const {
    Frame fr;
    fr.fn = &f;
    fr.vals.resize(f.slots.size());
    fr.defined.assign(f.slots.size(), 0);
    for (std::size_t i = 0; i < f.slots.size(); ++i) fr.vals[i] = default_of(f.slots[i].type);
    return fr;
  }

  static std::int64_t default_of(const ValueType& t) { return t.is_ref() ? kNull : 0; }

  // Calls function `idx`; returns its results.
  std::vector<std::int64_t> call(int idx, std::vector<std::int64_t> args) {
    const Function& f = p_.functions[static_cast<std::size_t>(idx)];
    if (++depth_ > opts_.max_depth) throw BudgetExhausted{"recursion depth exceeded"};
    Frame fr = new_frame(f);
    for (std::size_t i = 0; i < args.size(); ++i) {
      fr.vals[i] = args[i];
      fr.defined[i] = 1;
    }
    exec_block(fr, f.body);
    --depth_;
    if (fr.ret.size() < f.returns.size()) {
      fr.ret.clear();
      for (const auto& t : f.returns) fr.ret.push_back(default_of(t));
    }
    return std::move(fr.ret);
  }

  // Runs entry-function top-level statements [first, last).
  Flow run_top(Frame& fr, std::size_t first, std::size_t last, bool bind_res) {
    const auto& body = fr.fn->body;
    for (std::size_t g = first; g < last; ++g) {
      snapshot_if_requested(fr, g);
      const Stmt& s = body[g];
      if (bind_res && s.kind == Stmt::Kind::Call) {
        tick();
        auto args = eval_args(fr, s.args);
        auto out = call(s.callee_index, std::move(args));
        if (!out.empty()) {
          fr.has_res = true;
          fr.res = out[0];
          fr.res_type = p_.functions[static_cast<std::size_t>(s.callee_index)].returns[0];
        }
        continue;
      }
      if (exec(fr, s) == Flow::Return) {
        if (!fr.ret.empty()) {
          fr.has_res = true;
          fr.res = fr.ret[0];
          fr.res_type = fr.fn->returns[0];
        }
        return Flow::Return;
      }
    }
    if (last == body.size()) snapshot_if_requested(fr, body.size());
    return Flow::Next;
  }

  MemoryGraph graph_of(const Frame& fr) const {
    MemoryGraph g;
    std::vector<NodeId> node_of(heap_.size(), 0);
    std::vector<char> mapped(heap_.size(), 0);
    std::vector<std::size_t> work;
    auto target = [&](const ValueType& t, std::int64_t v) -> NodeId {
      if (!t.is_ref()) return g.add_value(t.to_string(), v);
      if (v < 0 || static_cast<std::size_t>(v) >= heap_.size()) return kNullNode;
      auto o = static_cast<std::size_t>(v);
      if (!mapped[o]) {
        mapped[o] = 1;
        node_of[o] = g.add_record(p_.schema.records()[static_cast<std::size_t>(heap_[o].record)].name);
        work.push_back(o);
      }
      return node_of[o];
    };
    auto drain = [&] {
      while (!work.empty()) {
        auto o = work.back();
        work.pop_back();
        const auto& decl = p_.schema.records()[static_cast<std::size_t>(heap_[o].record)];
        for (std::size_t i = 0; i < decl.fields.size(); ++i)
          g.set_edge(node_of[o], decl.fields[i].name, target(decl.fields[i].type, heap_[o].fields[i]));
      }
    };
    for (std::size_t i = 0; i < fr.vals.size(); ++i) {
      if (!fr.defined[i]) continue;
      const auto& v = fr.fn->slots[i];
      g.set_edge(kInitNode, v.name, target(v.type, fr.vals[i]));
      drain();
    }
    if (fr.has_res) {
      g.set_edge(kInitNode, "res", target(fr.res_type, fr.res));
      drain();
    }
    return g;
  }

  // Rebuilds an entry-function frame and heap from a memory graph.
  Frame load(const MemoryGraph& g) {
    const Function& f = p_.main();
    Frame fr = new_frame(f);
    std::map<NodeId, std::int64_t> obj_of;
    std::vector<NodeId> work;
    auto object = [&](NodeId n) -> std::int64_t {
      if (!g.is_record(n)) return kNull;
      auto it = obj_of.find(n);
      if (it != obj_of.end()) return it->second;
      auto rit = record_index_.find(g.type(n));
      if (rit == record_index_.end()) return kNull;
      const auto& decl = p_.schema.records()[static_cast<std::size_t>(rit->second)];
      Object o{rit->second, {}};
      for (const auto& fd : decl.fields) o.fields.push_back(default_of(fd.type));
      heap_.push_back(std::move(o));
      auto id = static_cast<std::int64_t>(heap_.size() - 1);
      obj_of.emplace(n, id);
      work.push_back(n);
      return id;
    };
    auto value_for = [&](const ValueType& t, NodeId n) -> std::int64_t {
      if (t.is_ref()) return object(n);
      auto v = g.value(n);
      return v ? *v : 0;
    };
    auto drain = [&] {
      while (!work.empty()) {
        NodeId n = work.back();
        work.pop_back();
        auto id = static_cast<std::size_t>(obj_of.at(n));
        const auto& decl = p_.schema.records()[static_cast<std::size_t>(heap_[id].record)];
        for (std::size_t i = 0; i < decl.fields.size(); ++i) {
          auto t = g.target(n, decl.fields[i].name);
          if (!t) continue;
          auto v = value_for(decl.fields[i].type, *t);
          heap_[id].fields[i] = v;
        }
      }
    };
    for (const auto& e : g.edges(kInitNode)) {
      int slot = f.slot_of(e.label);
      if (slot < 0) continue;
      auto s = static_cast<std::size_t>(slot);
      fr.vals[s] = value_for(f.slots[s].type, e.target);
      fr.defined[s] = 1;
      drain();
    }
    return fr;
  }

  std::vector<std::int64_t> eval_args(Frame& fr, const std::vector<Expr>& args) {
    std::vector<std::int64_t> out;
    out.reserve(args.size());
    for (const auto& a : args) out.push_back(eval(fr, a));
    return out;
  }

  std::int64_t new_object(const std::string& record, std::vector<std::int64_t> fields) {
    heap_.push_back(Object{record_index_.at(record), std::move(fields)});
    return static_cast<std::int64_t>(heap_.size() - 1);
  }

  bool holds(const Frame& fr, const Formula& f) const {
    if (f.is_true()) return true;
    auto roots = free_roots(f);
    std::vector<std::string> vars(roots.begin(), roots.end());
    MemoryGraph g = graph_of(fr).project(vars);
    ModelContext ctx{&p_.schema, preds_, opts_.num_bound};
    return models(g, f, ctx);
  }

  std::vector<Snapshot>& trace() { return trace_; }
  std::size_t steps() const { return steps_; }
  void reset_steps() {
    steps_ = 0;
    depth_ = 0;
  }

 private:
  void tick() {
    if (++steps_ > opts_.step_budget) throw BudgetExhausted{"step budget exceeded"};
  }

  void snapshot_if_requested(const Frame& fr, std::size_t gap) {
    for (auto g : opts_.snapshot_gaps) {
      if (g == gap) {
        trace_.push_back({gap, graph_of(fr)});
        return;
      }
    }
  }

  void assign(Frame& fr, int slot, std::int64_t v) {
    fr.vals[static_cast<std::size_t>(slot)] = v;
    fr.defined[static_cast<std::size_t>(slot)] = 1;
  }

  Flow exec_block(Frame& fr, const std::vector<Stmt>& stmts) {
    for (const auto& s : stmts)
      if (exec(fr, s) == Flow::Return) return Flow::Return;
    return Flow::Next;
  }

  Flow exec(Frame& fr, const Stmt& s) {
    tick();
    switch (s.kind) {
      case Stmt::Kind::VarDecl:
        assign(fr, s.target_slots[0], s.value ? eval(fr, *s.value) : default_of(s.decl_type));
        return Flow::Next;
      case Stmt::Kind::Assign: assign(fr, s.target_slots[0], eval(fr, *s.value)); return Flow::Next;
      case Stmt::Kind::FieldWrite: {
        const Expr& base = s.lhs.kids[0];
        std::int64_t obj = eval(fr, base);
        std::int64_t v = eval(fr, *s.value);
        if (obj < 0) throw MemoryFault{s.lhs.loc, fmt::format("null dereference writing {}", print_expr(s.lhs))};
        heap_[static_cast<std::size_t>(obj)].fields[static_cast<std::size_t>(s.lhs.field)] = v;
        return Flow::Next;
      }
      case Stmt::Kind::New: {
        auto fields = eval_args(fr, s.args);
        assign(fr, s.target_slots[0], new_object(s.callee, std::move(fields)));
        return Flow::Next;
      }
      case Stmt::Kind::Call: {
        auto out = call(s.callee_index, eval_args(fr, s.args));
        for (std::size_t i = 0; i < s.target_slots.size(); ++i) assign(fr, s.target_slots[i], out[i]);
        return Flow::Next;
      }
      case Stmt::Kind::If:
        return eval(fr, *s.value) ? exec_block(fr, s.body) : exec_block(fr, s.else_body);
      case Stmt::Kind::While:
        while (eval(fr, *s.value)) {
          if (exec_block(fr, s.body) == Flow::Return) return Flow::Return;
          tick();
        }
        return Flow::Next;
      case Stmt::Kind::Return:
        fr.ret = eval_args(fr, s.args);
        return Flow::Return;
      case Stmt::Kind::Assert:
        if (!holds(fr, s.formula)) throw AssertFailed{s.loc};
        return Flow::Next;
      case Stmt::Kind::Assume:
        if (!holds(fr, s.formula)) throw AssumeFailed{};
        return Flow::Next;
      case Stmt::Kind::Havoc:
        assign(fr, s.target_slots[0], default_of(fr.fn->slots[static_cast<std::size_t>(s.target_slots[0])].type));
        return Flow::Next;
    }
    return Flow::Next;
  }

  std::int64_t eval(Frame& fr, const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::Int: return wrap32(e.value);
      case Expr::Kind::Bool: return e.value;
      case Expr::Kind::Null: return kNull;
      case Expr::Kind::Var: return fr.vals[static_cast<std::size_t>(e.slot)];
      case Expr::Kind::Field: {
        std::int64_t obj = eval(fr, e.kids[0]);
        if (obj < 0) throw MemoryFault{e.loc, fmt::format("null dereference reading {}", print_expr(e))};
        return heap_[static_cast<std::size_t>(obj)].fields[static_cast<std::size_t>(e.field)];
      }
      case Expr::Kind::Unary: {
        std::int64_t v = eval(fr, e.kids[0]);
        return e.name == "-" ? wrap32(-v) : (v ? 0 : 1);
      }
      case Expr::Kind::Binary: break;
    }
    const std::string& op = e.name;
    if (op == "&&") return eval(fr, e.kids[0]) && eval(fr, e.kids[1]) ? 1 : 0;
    if (op == "||") return eval(fr, e.kids[0]) || eval(fr, e.kids[1]) ? 1 : 0;
    std::int64_t l = eval(fr, e.kids[0]);
    std::int64_t r = eval(fr, e.kids[1]);
    switch (op[0]) {
      case '+': return wrap32(l + r);
      case '-': return wrap32(l - r);
      case '*': return wrap32(l * r);
      case '=': return l == r;
      case '!': return l != r;
      case '<': return op.size() == 1 ? l < r : l <= r;
      case '>': return op.size() == 1 ? l > r : l >= r;
    }
    throw Error(fmt::format("unknown operator '{}'", op));
  }

  const Program& p_;
  const PredicateRegistry* preds_;
  const RunOptions& opts_;
  std::map<std::string, int, std::less<>> record_index_;
  std::vector<Object> heap_;
  std::vector<Snapshot> trace_;
  std::size_t steps_ = 0;
  std::size_t depth_ = 0;
};

template <typename Body>
ExecutionOutcome guarded(Machine& m, Body body) {
  ExecutionOutcome out;
  try {
    body(out);
  } catch (const MemoryFault& f) {
    out = ExecutionOutcome{};
    out.kind = OutcomeKind::MemoryError;
    out.error_loc = f.loc;
    out.message = fmt::format("{}:{}: {}", f.loc.line, f.loc.column, f.message);
  } catch (const BudgetExhausted& b) {
    out = ExecutionOutcome{};
    out.kind = OutcomeKind::StepBudgetExceeded;
    out.message = b.message;
  } catch (const AssertFailed& a) {
    out = ExecutionOutcome{};
    out.kind = OutcomeKind::PostViolation;
    out.error_loc = a.loc;
    out.message = fmt::format("{}:{}: assertion failed", a.loc.line, a.loc.column);
  } catch (const AssumeFailed&) {
    out = ExecutionOutcome{};
    out.kind = OutcomeKind::Normal;
    out.message = "assumption failed";
  }
  out.trace = std::move(m.trace());
  out.steps = m.steps();
  return out;
}

void finish_entry(Machine& m, Frame& fr, const Program& p, const RunOptions& opts, ExecutionOutcome& out) {
  const Function& f = p.main();
  if (opts.check_ensures && f.ensures && !m.holds(fr, *f.ensures)) {
    out.kind = OutcomeKind::PostViolation;
    out.message = "postcondition violated";
  }
  out.final_graph = m.graph_of(fr);
}

}  // namespace

Interpreter::Interpreter(const Program& program, const PredicateRegistry* preds) : program_(program), preds_(preds) {}

ModelContext Interpreter::model_context(IntRange num_bound) const { return ModelContext{&program_.schema, preds_, num_bound}; }

ExecutionOutcome Interpreter::run(std::span<const InputValue> inputs, const RunOptions& opts) const {
  const Function& f = program_.main();
  if (inputs.size() != f.params.size())
    throw Error(fmt::format("main expects {} input(s), got {}", f.params.size(), inputs.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    bool ref = inputs[i].kind != InputValue::Kind::Int;
    if (ref != f.params[i].type.is_ref())
      throw Error(fmt::format("input {} does not match parameter '{}: {}'", i + 1, f.params[i].name,
                              f.params[i].type.to_string()));
    if (inputs[i].kind == InputValue::Kind::Construct) {
      const Function* ctor = program_.find(inputs[i].ctor);
      if (!ctor || ctor->returns.size() != 1 || !(ctor->returns[0] == f.params[i].type))
        throw Error(fmt::format("'{}' is not a constructor for {}", inputs[i].ctor, f.params[i].type.to_string()));
    }
  }
  Machine m(program_, preds_, opts);
  return guarded(m, [&](ExecutionOutcome& out) {
    Frame fr = m.new_frame(f);
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      std::int64_t v = kNull;
      switch (inputs[i].kind) {
        case InputValue::Kind::Int: v = wrap32(inputs[i].value); break;
        case InputValue::Kind::Null: break;
        case InputValue::Kind::Construct: {
          try {
            auto r = m.call(program_.index_of(inputs[i].ctor), inputs[i].ctor_args);
            v = r[0];
          } catch (const MemoryFault&) {
          } catch (const BudgetExhausted&) {
          }
          break;
        }
      }
      fr.vals[i] = v;
      fr.defined[i] = 1;
    }
    m.reset_steps();
    m.run_top(fr, 0, f.body.size(), false);
    finish_entry(m, fr, program_, opts, out);
  });
}

ExecutionOutcome Interpreter::resume(std::size_t gap, const MemoryGraph& state, const RunOptions& opts) const {
  const Function& f = program_.main();
  if (gap > f.body.size()) throw Error(fmt::format("gap {} outside main", gap));
  Machine m(program_, preds_, opts);
  return guarded(m, [&](ExecutionOutcome& out) {
    Frame fr = m.load(state);
    m.run_top(fr, gap, f.body.size(), false);
    finish_entry(m, fr, program_, opts, out);
  });
}

ExecutionOutcome Interpreter::run_fragment(std::size_t first, std::size_t last, const MemoryGraph& state,
                                           bool bind_res, const RunOptions& opts) const {
  const Function& f = program_.main();
  if (first > last || last > f.body.size()) throw Error("fragment outside main");
  Machine m(program_, preds_, opts);
  return guarded(m, [&](ExecutionOutcome& out) {
    Frame fr = m.load(state);
    m.run_top(fr, first, last, bind_res);
    out.final_graph = m.graph_of(fr);
  });
}

}  // namespace slearner
