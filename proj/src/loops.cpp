#include "slearner/loops.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace slearner {

namespace {

void loops_in(const std::vector<Stmt>& stmts, std::size_t& n) {
  for (const auto& s : stmts) {
    if (s.kind == Stmt::Kind::While) ++n;
    loops_in(s.body, n);
    loops_in(s.else_body, n);
  }
}

// Variables declared, used and assigned by a statement list.
struct Usage {
  std::set<std::string> declared;
  std::set<std::string> used;
  std::set<std::string> assigned;
  bool returns = false;

  void expr(const Expr& e) {
    std::vector<std::string> vars;
    expr_vars(e, vars);
    used.insert(vars.begin(), vars.end());
  }

  void block(const std::vector<Stmt>& stmts) {
    for (const auto& s : stmts) stmt(s);
  }

  void stmt(const Stmt& s) {
    if (s.declares || s.kind == Stmt::Kind::VarDecl) declared.insert(s.targets.begin(), s.targets.end());
    switch (s.kind) {
      case Stmt::Kind::VarDecl:
      case Stmt::Kind::Assign:
      case Stmt::Kind::New:
      case Stmt::Kind::Call:
      case Stmt::Kind::Havoc:
        used.insert(s.targets.begin(), s.targets.end());
        assigned.insert(s.targets.begin(), s.targets.end());
        break;
      case Stmt::Kind::FieldWrite:
        expr(s.lhs);
        break;
      case Stmt::Kind::Return:
        returns = true;
        break;
      case Stmt::Kind::Assert:
      case Stmt::Kind::Assume: {
        auto roots = free_roots(s.formula);
        used.insert(roots.begin(), roots.end());
        break;
      }
      default:
        break;
    }
    if (s.value) expr(*s.value);
    for (const auto& a : s.args) expr(a);
    block(s.body);
    block(s.else_body);
  }
};

Stmt make(Stmt::Kind k, SourceLoc loc) {
  Stmt s;
  s.kind = k;
  s.loc = loc;
  return s;
}

Stmt var_decl(const std::string& name, const ValueType& t, std::optional<Expr> init, SourceLoc loc) {
  Stmt s = make(Stmt::Kind::VarDecl, loc);
  s.targets = {name};
  s.declares = true;
  s.decl_type = t;
  s.value = std::move(init);
  return s;
}

std::vector<Expr> vars_as_exprs(const std::vector<std::string>& names, SourceLoc loc) {
  std::vector<Expr> out;
  for (const auto& n : names) out.push_back(Expr::var(n, loc));
  return out;
}

Stmt call(const std::string& callee, std::vector<std::string> targets, const std::vector<std::string>& args,
          SourceLoc loc) {
  Stmt s = make(Stmt::Kind::Call, loc);
  s.callee = callee;
  s.targets = std::move(targets);
  s.args = vars_as_exprs(args, loc);
  return s;
}

Stmt ret(std::vector<Expr> values, SourceLoc loc) {
  Stmt s = make(Stmt::Kind::Return, loc);
  s.args = std::move(values);
  return s;
}

class Rewriter {
 public:
  Rewriter(Program& p, std::vector<Function>& added) : p_(p), added_(added) {}

  void function(Function& f) {
    fn_ = &f;
    counter_ = 0;
    f.body = block(f.body);
  }

 private:
  std::vector<Stmt> block(const std::vector<Stmt>& in) {
    std::vector<Stmt> out;
    for (const auto& s : in) {
      if (s.kind == Stmt::Kind::While) {
        auto repl = loop(s);
        for (auto& r : repl) out.push_back(std::move(r));
        continue;
      }
      Stmt c = s;
      c.body = block(s.body);
      c.else_body = block(s.else_body);
      out.push_back(std::move(c));
    }
    return out;
  }

  std::string fresh_name() {
    while (true) {
      auto name = fmt::format("{}_loop{}", fn_->name, ++counter_);
      bool taken = p_.index_of(name) >= 0 ||
                   std::any_of(added_.begin(), added_.end(), [&](const Function& f) { return f.name == name; });
      if (!taken) return name;
    }
  }

  const ValueType& type_of(const std::string& var) const {
    const auto* v = find_var(fn_->slots, var);
    if (v == nullptr) throw Error(fmt::format("loop transform: unknown variable '{}' in '{}'", var, fn_->name));
    return v->type;
  }

  // Orders names by the slot order of the current function.
  std::vector<std::string> ordered(const std::set<std::string>& names) const {
    std::vector<std::string> out;
    for (const auto& v : fn_->slots) {
      if (names.contains(v.name)) out.push_back(v.name);
    }
    return out;
  }

  // Rewrites `return e..;` into `return (w.., true, e..);`.
  void rewrite_returns(std::vector<Stmt>& stmts, const std::vector<std::string>& written) {
    for (auto& s : stmts) {
      if (s.kind == Stmt::Kind::Return) {
        auto values = vars_as_exprs(written, s.loc);
        values.push_back(Expr::boolean(true, s.loc));
        for (auto& a : s.args) values.push_back(std::move(a));
        s.args = std::move(values);
      }
      rewrite_returns(s.body, written);
      rewrite_returns(s.else_body, written);
    }
  }

  std::vector<Stmt> loop(const Stmt& w) {
    const auto name = fresh_name();
    const SourceLoc loc = w.loc;
    std::vector<Stmt> body = block(w.body);

    Usage u;
    u.expr(*w.value);
    u.block(body);
    std::set<std::string> outer_used;
    std::set<std::string> outer_written;
    for (const auto& v : u.used) {
      if (!u.declared.contains(v)) outer_used.insert(v);
    }
    for (const auto& v : u.assigned) {
      if (!u.declared.contains(v)) outer_written.insert(v);
    }
    const auto params = ordered(outer_used);
    const auto written = ordered(outer_written);
    const bool returns = u.returns;

    const std::string done = name + "_done";
    std::vector<std::string> ret_vars;
    for (std::size_t i = 0; i < fn_->returns.size(); ++i) {
      ret_vars.push_back(fn_->returns.size() == 1 ? name + "_ret" : fmt::format("{}_ret{}", name, i + 1));
    }
    std::vector<std::string> outputs = written;
    if (returns) {
      outputs.push_back(done);
      outputs.insert(outputs.end(), ret_vars.begin(), ret_vars.end());
    }

    Function h;
    h.name = name;
    h.loc = loc;
    for (const auto& v : params) h.params.push_back({v, type_of(v)});
    for (const auto& v : written) h.returns.push_back(type_of(v));
    if (returns) {
      h.returns.push_back(ValueType::boolean());
      h.returns.insert(h.returns.end(), fn_->returns.begin(), fn_->returns.end());
      h.body.push_back(var_decl(done, ValueType::boolean(), Expr::boolean(false, loc), loc));
      for (std::size_t i = 0; i < ret_vars.size(); ++i) {
        h.body.push_back(var_decl(ret_vars[i], fn_->returns[i], std::nullopt, loc));
      }
      rewrite_returns(body, written);
    }
    Stmt branch = make(Stmt::Kind::If, loc);
    branch.value = *w.value;
    branch.body = std::move(body);
    branch.body.push_back(call(name, outputs, params, loc));
    h.body.push_back(std::move(branch));
    if (!outputs.empty()) h.body.push_back(ret(vars_as_exprs(outputs, loc), loc));
    added_.push_back(std::move(h));

    std::vector<Stmt> site;
    if (returns) {
      site.push_back(var_decl(done, ValueType::boolean(), Expr::boolean(false, loc), loc));
      for (std::size_t i = 0; i < ret_vars.size(); ++i) {
        site.push_back(var_decl(ret_vars[i], fn_->returns[i], std::nullopt, loc));
      }
    }
    site.push_back(call(name, outputs, params, loc));
    if (returns) {
      Stmt exit = make(Stmt::Kind::If, loc);
      exit.value = Expr::var(done, loc);
      exit.body.push_back(ret(vars_as_exprs(ret_vars, loc), loc));
      site.push_back(std::move(exit));
    }
    return site;
  }

  Program& p_;
  std::vector<Function>& added_;
  Function* fn_ = nullptr;
  int counter_ = 0;
};

}  // namespace

std::size_t count_loops(const Program& p) {
  std::size_t n = 0;
  for (const auto& f : p.functions) loops_in(f.body, n);
  return n;
}

Program loops_to_tailrec(const Program& in) {
  Program p = in;
  if (count_loops(p) == 0) return p;
  std::vector<Function> added;
  Rewriter r(p, added);
  for (auto& f : p.functions) r.function(f);
  for (auto& f : added) p.functions.push_back(std::move(f));
  typecheck(p);
  return p;
}

}  // namespace slearner
