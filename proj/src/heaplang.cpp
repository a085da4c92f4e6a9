#include "slearner/heaplang.hpp"

#include <algorithm>
#include <cctype>
#include <fmt/format.h>
#include <map>
#include <set>

namespace slearner {

Expr Expr::integer(std::int64_t v, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Int;
  e.value = v;
  e.loc = loc;
  return e;
}

Expr Expr::boolean(bool v, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Bool;
  e.value = v ? 1 : 0;
  e.loc = loc;
  return e;
}

Expr Expr::null(SourceLoc loc) {
  Expr e;
  e.kind = Kind::Null;
  e.loc = loc;
  return e;
}

Expr Expr::var(std::string name, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Var;
  e.name = std::move(name);
  e.loc = loc;
  return e;
}

Expr Expr::field_of(Expr base, std::string field, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Field;
  e.name = std::move(field);
  e.kids.push_back(std::move(base));
  e.loc = loc;
  return e;
}

Expr Expr::unary(std::string op, Expr x, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Unary;
  e.name = std::move(op);
  e.kids.push_back(std::move(x));
  e.loc = loc;
  return e;
}

Expr Expr::binary(std::string op, Expr l, Expr r, SourceLoc loc) {
  Expr e;
  e.kind = Kind::Binary;
  e.name = std::move(op);
  e.kids.push_back(std::move(l));
  e.kids.push_back(std::move(r));
  e.loc = loc;
  return e;
}

int Function::slot_of(std::string_view var) const {
  for (std::size_t i = 0; i < slots.size(); ++i)
    if (slots[i].name == var) return static_cast<int>(i);
  return -1;
}

const Function* Program::find(std::string_view name) const {
  int i = index_of(name);
  return i < 0 ? nullptr : &functions[static_cast<std::size_t>(i)];
}

int Program::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < functions.size(); ++i)
    if (functions[i].name == name) return static_cast<int>(i);
  return -1;
}

// ---------------------------------------------------------------------------
// Lexer

namespace {

enum class T { Ident, Int, Punct, End };

struct Token {
  T kind;
  std::string text;
  std::int64_t value = 0;
  SourceLoc loc;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<Token> lex(std::string_view src) {
  std::vector<Token> out;
  std::size_t pos = 0;
  int line = 1, col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t i = 0; i < n; ++i, ++pos) {
      if (src[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  static const std::vector<std::string> puncts = {"|->", "->", "==", "!=", "<=", ">=", "&&", "||", "{", "}", "(",
                                                  ")",   ";",  ":",  ",",  ".",  "=",  "<",  ">",  "+",  "-", "*",
                                                  "!",   "|",  "&",  "_"};
  while (true) {
    while (pos < src.size()) {
      if (std::isspace(static_cast<unsigned char>(src[pos]))) {
        advance(1);
      } else if (src.substr(pos, 2) == "//") {
        while (pos < src.size() && src[pos] != '\n') advance(1);
      } else {
        break;
      }
    }
    SourceLoc loc{line, col};
    if (pos >= src.size()) {
      out.push_back({T::End, "", 0, loc, pos, pos});
      return out;
    }
    const std::size_t begin = pos;
    char c = src[pos];
    if (std::isalpha(static_cast<unsigned char>(c)) ||
        (c == '_' && pos + 1 < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos + 1])) || src[pos + 1] == '_'))) {
      std::size_t n = 0;
      while (pos + n < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos + n])) || src[pos + n] == '_')) ++n;
      std::string id(src.substr(pos, n));
      advance(n);
      out.push_back({T::Ident, id, 0, loc, begin, pos});
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::int64_t v = 0;
      std::size_t n = 0;
      while (pos + n < src.size() && std::isdigit(static_cast<unsigned char>(src[pos + n]))) {
        v = v * 10 + (src[pos + n] - '0');
        if (v > (std::int64_t{1} << 40)) throw ParseError(loc, "integer literal too large");
        ++n;
      }
      std::string text(src.substr(pos, n));
      advance(n);
      out.push_back({T::Int, text, v, loc, begin, pos});
    } else {
      bool matched = false;
      for (const auto& p : puncts) {
        if (src.substr(pos, p.size()) == p) {
          advance(p.size());
          out.push_back({T::Punct, p, 0, loc, begin, pos});
          matched = true;
          break;
        }
      }
      if (!matched) throw ParseError(loc, fmt::format("unexpected character '{}'", c));
    }
  }
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view src, const PredicateRegistry* preds) : src_(src), toks_(lex(src)), preds_(preds) {}

  Program program() {
    Program p;
    while (peek().kind != T::End) {
      if (is_word("type")) {
        p.schema.add(record());
      } else if (is_word("fn")) {
        p.functions.push_back(function());
      } else {
        fail(peek(), fmt::format("expected 'type' or 'fn', found '{}'", peek().text));
      }
    }
    return p;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool is_punct(std::string_view p, std::size_t k = 0) const {
    return peek(k).kind == T::Punct && peek(k).text == p;
  }
  bool is_word(std::string_view w) const { return peek().kind == T::Ident && peek().text == w; }
  bool accept(std::string_view p) {
    if (!is_punct(p)) return false;
    ++pos_;
    return true;
  }
  void expect(std::string_view p) {
    if (!accept(p)) fail(peek(), fmt::format("expected '{}'", p));
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(t.loc, t.kind == T::End ? msg + " at end of input" : msg);
  }
  std::string ident(std::string_view what) {
    if (peek().kind != T::Ident) fail(peek(), fmt::format("expected {}", what));
    static const std::set<std::string, std::less<>> reserved = {
        "type", "fn", "var", "if", "else", "while", "return", "new", "null", "true",
        "false", "requires", "ensures", "assert", "assume", "havoc", "int", "bool"};
    if (reserved.contains(peek().text)) fail(peek(), fmt::format("expected {}, found keyword '{}'", what, peek().text));
    return next().text;
  }

  ValueType type() {
    if (is_word("int")) {
      next();
      return ValueType::integer();
    }
    if (is_word("bool")) {
      next();
      return ValueType::boolean();
    }
    return ValueType::ref(ident("type name"));
  }

  RecordDecl record() {
    next();
    RecordDecl r;
    r.name = ident("record name");
    expect("{");
    while (!accept("}")) {
      FieldDecl f;
      f.name = ident("field name");
      expect(":");
      f.type = type();
      expect(";");
      r.fields.push_back(std::move(f));
    }
    return r;
  }

  // Raw formula text up to (excluding) a stop token.
  Formula formula(const std::vector<std::string>& stop_punct, const std::vector<std::string>& stop_words) {
    const Token& first = peek();
    std::size_t depth = 0;
    while (peek().kind != T::End) {
      if (peek().kind == T::Punct && peek().text == "(") ++depth;
      if (peek().kind == T::Punct && peek().text == ")") {
        if (depth == 0) break;
        --depth;
      }
      if (depth == 0 && peek().kind == T::Punct &&
          std::find(stop_punct.begin(), stop_punct.end(), peek().text) != stop_punct.end())
        break;
      if (depth == 0 && peek().kind == T::Ident &&
          std::find(stop_words.begin(), stop_words.end(), peek().text) != stop_words.end())
        break;
      next();
    }
    const std::size_t end = peek().begin;
    if (end <= first.begin) fail(first, "expected formula");
    return parse_formula(src_.substr(first.begin, end - first.begin), preds_, first.loc);
  }

  Function function() {
    next();
    Function f;
    f.loc = peek().loc;
    f.name = ident("function name");
    expect("(");
    if (!accept(")")) {
      while (true) {
        TypedVar v;
        v.name = ident("parameter name");
        expect(":");
        v.type = type();
        f.params.push_back(std::move(v));
        if (accept(")")) break;
        expect(",");
      }
    }
    if (accept("->")) {
      if (accept("(")) {
        while (true) {
          f.returns.push_back(type());
          if (accept(")")) break;
          expect(",");
        }
      } else {
        f.returns.push_back(type());
      }
    }
    while (true) {
      if (is_word("requires")) {
        const Token& kw = next();
        if (f.requires_) fail(kw, "duplicate requires clause");
        f.requires_ = formula({"{"}, {"ensures", "requires"});
      } else if (is_word("ensures")) {
        const Token& kw = next();
        if (f.ensures) fail(kw, "duplicate ensures clause");
        f.ensures = formula({"{"}, {"ensures", "requires"});
      } else {
        break;
      }
    }
    f.body = block();
    return f;
  }

  std::vector<Stmt> block() {
    expect("{");
    std::vector<Stmt> out;
    while (!accept("}")) {
      if (peek().kind == T::End) fail(peek(), "expected '}'");
      out.push_back(statement());
    }
    return out;
  }

  std::vector<Expr> call_args() {
    expect("(");
    std::vector<Expr> args;
    if (accept(")")) return args;
    while (true) {
      args.push_back(expr());
      if (accept(")")) return args;
      expect(",");
    }
  }

  bool at_call() const { return peek().kind == T::Ident && is_punct("(", 1); }

  // Right-hand side of an assignment or declaration.
  void rhs(Stmt& s) {
    if (is_word("new")) {
      next();
      s.kind = Stmt::Kind::New;
      s.callee = ident("record name");
      s.args = call_args();
    } else if (at_call()) {
      s.kind = Stmt::Kind::Call;
      s.callee = next().text;
      s.args = call_args();
    } else {
      s.value = expr();
    }
  }

  Stmt statement() {
    Stmt s;
    s.loc = peek().loc;
    if (is_word("var")) {
      next();
      s.kind = Stmt::Kind::VarDecl;
      s.declares = true;
      s.targets.push_back(ident("variable name"));
      expect(":");
      s.decl_type = type();
      if (accept("=")) rhs(s);
      expect(";");
      return s;
    }
    if (is_word("if")) {
      next();
      s.kind = Stmt::Kind::If;
      expect("(");
      s.value = expr();
      expect(")");
      s.body = block();
      if (is_word("else")) {
        next();
        if (is_word("if"))
          s.else_body.push_back(statement());
        else
          s.else_body = block();
      }
      return s;
    }
    if (is_word("while")) {
      next();
      s.kind = Stmt::Kind::While;
      expect("(");
      s.value = expr();
      expect(")");
      s.body = block();
      return s;
    }
    if (is_word("return")) {
      next();
      s.kind = Stmt::Kind::Return;
      if (accept(";")) return s;
      if (is_punct("(")) {
        const std::size_t save = pos_;
        next();
        Expr first = expr();
        if (accept(",")) {
          s.args.push_back(std::move(first));
          while (true) {
            s.args.push_back(expr());
            if (accept(")")) break;
            expect(",");
          }
          expect(";");
          return s;
        }
        pos_ = save;
      }
      s.args.push_back(expr());
      expect(";");
      return s;
    }
    if (is_word("assert") || is_word("assume")) {
      s.kind = next().text == "assert" ? Stmt::Kind::Assert : Stmt::Kind::Assume;
      s.formula = formula({";"}, {});
      expect(";");
      return s;
    }
    if (is_word("havoc")) {
      next();
      s.kind = Stmt::Kind::Havoc;
      s.targets.push_back(ident("variable name"));
      expect(";");
      return s;
    }
    if (is_punct("(")) {
      next();
      while (true) {
        s.targets.push_back(ident("variable name"));
        if (accept(")")) break;
        expect(",");
      }
      expect("=");
      if (!at_call()) fail(peek(), "tuple assignment requires a call");
      s.kind = Stmt::Kind::Call;
      s.callee = next().text;
      s.args = call_args();
      expect(";");
      return s;
    }
    if (at_call()) {
      s.kind = Stmt::Kind::Call;
      s.callee = next().text;
      s.args = call_args();
      expect(";");
      return s;
    }
    const Token& first = peek();
    std::string name = ident("statement");
    if (is_punct(".")) {
      Expr lhs = Expr::var(name, first.loc);
      while (accept(".")) {
        SourceLoc loc = peek().loc;
        lhs = Expr::field_of(std::move(lhs), ident("field name"), loc);
      }
      expect("=");
      s.kind = Stmt::Kind::FieldWrite;
      s.lhs = std::move(lhs);
      s.value = expr();
      expect(";");
      return s;
    }
    expect("=");
    s.kind = Stmt::Kind::Assign;
    s.targets.push_back(name);
    rhs(s);
    expect(";");
    return s;
  }

  // Expressions, lowest precedence first.
  Expr expr() { return binary_level(0); }

  Expr binary_level(int level) {
    static const std::vector<std::vector<std::string>> levels = {
        {"||"}, {"&&"}, {"==", "!="}, {"<", "<=", ">", ">="}, {"+", "-"}, {"*"}};
    if (level == static_cast<int>(levels.size())) return unary();
    Expr lhs = binary_level(level + 1);
    while (true) {
      const auto& ops = levels[static_cast<std::size_t>(level)];
      if (peek().kind != T::Punct || std::find(ops.begin(), ops.end(), peek().text) == ops.end()) return lhs;
      const Token& op = next();
      Expr rhs = binary_level(level + 1);
      lhs = Expr::binary(op.text, std::move(lhs), std::move(rhs), op.loc);
    }
  }

  Expr unary() {
    if (is_punct("-") || is_punct("!")) {
      const Token& op = next();
      return Expr::unary(op.text, unary(), op.loc);
    }
    Expr e = primary();
    while (is_punct(".")) {
      next();
      SourceLoc loc = peek().loc;
      e = Expr::field_of(std::move(e), ident("field name"), loc);
    }
    return e;
  }

  Expr primary() {
    const Token& t = peek();
    if (t.kind == T::Int) {
      next();
      return Expr::integer(t.value, t.loc);
    }
    if (accept("(")) {
      Expr e = expr();
      expect(")");
      return e;
    }
    if (is_word("true") || is_word("false")) {
      next();
      return Expr::boolean(t.text == "true", t.loc);
    }
    if (is_word("null")) {
      next();
      return Expr::null(t.loc);
    }
    if (at_call()) fail(t, "calls are only allowed as statements");
    return Expr::var(ident("expression"), t.loc);
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const PredicateRegistry* preds_;
};

// ---------------------------------------------------------------------------
// Type checker

class Checker {
 public:
  explicit Checker(Program& p) : p_(p) {}

  void run() {
    std::set<std::string> names;
    for (const auto& r : p_.schema.records()) {
      if (!names.insert(r.name).second) throw ParseError({}, fmt::format("duplicate declaration of type '{}'", r.name));
      std::set<std::string> fields;
      for (const auto& f : r.fields) {
        if (!fields.insert(f.name).second)
          throw ParseError({}, fmt::format("duplicate declaration of field '{}.{}'", r.name, f.name));
        check_type(f.type, {});
      }
    }
    std::set<std::string> fns;
    p_.entry = -1;
    for (std::size_t i = 0; i < p_.functions.size(); ++i) {
      const auto& f = p_.functions[i];
      if (!fns.insert(f.name).second) throw ParseError(f.loc, fmt::format("duplicate declaration of function '{}'", f.name));
      if (f.name == "main") p_.entry = static_cast<int>(i);
    }
    if (p_.entry < 0) throw ParseError({1, 1}, "no entry function");
    for (auto& f : p_.functions) function(f);
  }

 private:
  void check_type(const ValueType& t, SourceLoc loc) const {
    if (t.is_ref() && !p_.schema.find(t.record)) throw ParseError(loc, fmt::format("unknown type '{}'", t.record));
  }

  static bool assignable(const ValueType& to, const Expr& e) {
    if (e.is_null_type) return to.is_ref();
    return to == e.type;
  }

  void function(Function& f) {
    fn_ = &f;
    f.slots.clear();
    scopes_.assign(1, {});
    for (const auto& v : f.params) {
      check_type(v.type, f.loc);
      declare(v.name, v.type, f.loc);
    }
    for (const auto& t : f.returns) check_type(t, f.loc);
    block(f.body);
  }

  void declare(const std::string& name, const ValueType& t, SourceLoc loc) {
    if (name == "res") throw ParseError(loc, "'res' is reserved for results");
    if (fn_->slot_of(name) >= 0) throw ParseError(loc, fmt::format("duplicate declaration of '{}'", name));
    fn_->slots.push_back({name, t});
    scopes_.back().insert(name);
  }

  int lookup(const std::string& name, SourceLoc loc) const {
    for (const auto& s : scopes_)
      if (s.contains(name)) return fn_->slot_of(name);
    throw ParseError(loc, fmt::format("undeclared variable '{}'", name));
  }

  void block(std::vector<Stmt>& stmts) {
    scopes_.emplace_back();
    for (auto& s : stmts) stmt(s);
    scopes_.pop_back();
  }

  void args_against(std::vector<Expr>& args, const std::vector<ValueType>& types, SourceLoc loc,
                    const std::string& what) {
    if (args.size() != types.size())
      throw ParseError(loc, fmt::format("{} expects {} argument(s), got {}", what, types.size(), args.size()));
    for (std::size_t i = 0; i < args.size(); ++i) {
      expr(args[i]);
      if (!assignable(types[i], args[i]))
        throw ParseError(args[i].loc, fmt::format("argument {} of {} must be {}", i + 1, what, types[i].to_string()));
    }
  }

  void assign_to(Stmt& s, const std::vector<ValueType>& types) {
    s.target_slots.clear();
    for (std::size_t i = 0; i < s.targets.size(); ++i) {
      if (s.declares) declare(s.targets[i], s.decl_type, s.loc);
      int slot = lookup(s.targets[i], s.loc);
      s.target_slots.push_back(slot);
      if (i < types.size() && !(fn_->slots[static_cast<std::size_t>(slot)].type == types[i]))
        throw ParseError(s.loc, fmt::format("cannot assign {} to '{}'", types[i].to_string(), s.targets[i]));
    }
  }

  void stmt(Stmt& s) {
    switch (s.kind) {
      case Stmt::Kind::VarDecl: {
        check_type(s.decl_type, s.loc);
        if (s.value) {
          expr(*s.value);
          if (!assignable(s.decl_type, *s.value))
            throw ParseError(s.value->loc, fmt::format("cannot initialise '{}' of type {}", s.targets[0], s.decl_type.to_string()));
        }
        assign_to(s, {});
        break;
      }
      case Stmt::Kind::Assign: {
        int slot = lookup(s.targets[0], s.loc);
        expr(*s.value);
        if (!assignable(fn_->slots[static_cast<std::size_t>(slot)].type, *s.value))
          throw ParseError(s.value->loc, fmt::format("type mismatch in assignment to '{}'", s.targets[0]));
        s.target_slots = {slot};
        break;
      }
      case Stmt::Kind::FieldWrite:
        expr(s.lhs);
        expr(*s.value);
        if (!assignable(s.lhs.type, *s.value)) throw ParseError(s.value->loc, "type mismatch in field assignment");
        break;
      case Stmt::Kind::New: {
        if (s.declares) check_type(s.decl_type, s.loc);
        const RecordDecl* r = p_.schema.find(s.callee);
        if (!r) throw ParseError(s.loc, fmt::format("unknown type '{}'", s.callee));
        std::vector<ValueType> types;
        for (const auto& f : r->fields) types.push_back(f.type);
        args_against(s.args, types, s.loc, fmt::format("new {}", s.callee));
        assign_to(s, {ValueType::ref(s.callee)});
        break;
      }
      case Stmt::Kind::Call: {
        if (s.declares) check_type(s.decl_type, s.loc);
        s.callee_index = p_.index_of(s.callee);
        if (s.callee_index < 0) throw ParseError(s.loc, fmt::format("unknown function '{}'", s.callee));
        const Function& callee = p_.functions[static_cast<std::size_t>(s.callee_index)];
        std::vector<ValueType> types;
        for (const auto& v : callee.params) types.push_back(v.type);
        args_against(s.args, types, s.loc, fmt::format("function '{}'", s.callee));
        if (!s.targets.empty() && s.targets.size() != callee.returns.size())
          throw ParseError(s.loc, fmt::format("function '{}' returns {} value(s)", s.callee, callee.returns.size()));
        assign_to(s, callee.returns);
        break;
      }
      case Stmt::Kind::If:
        cond(*s.value);
        block(s.body);
        block(s.else_body);
        break;
      case Stmt::Kind::While:
        cond(*s.value);
        block(s.body);
        break;
      case Stmt::Kind::Return:
        args_against(s.args, fn_->returns, s.loc, "return");
        break;
      case Stmt::Kind::Assert:
      case Stmt::Kind::Assume: break;
      case Stmt::Kind::Havoc: s.target_slots = {lookup(s.targets[0], s.loc)}; break;
    }
  }

  void cond(Expr& e) {
    expr(e);
    if (e.is_null_type || e.type.kind != ScalarKind::Bool) throw ParseError(e.loc, "condition must be bool");
  }

  void expr(Expr& e) {
    e.is_null_type = false;
    switch (e.kind) {
      case Expr::Kind::Int: e.type = ValueType::integer(); return;
      case Expr::Kind::Bool: e.type = ValueType::boolean(); return;
      case Expr::Kind::Null:
        e.type = ValueType::ref("");
        e.is_null_type = true;
        return;
      case Expr::Kind::Var:
        e.slot = lookup(e.name, e.loc);
        e.type = fn_->slots[static_cast<std::size_t>(e.slot)].type;
        return;
      case Expr::Kind::Field: {
        expr(e.kids[0]);
        const Expr& base = e.kids[0];
        if (base.is_null_type || !base.type.is_ref()) throw ParseError(e.loc, fmt::format("field access '.{}' on non-record", e.name));
        const RecordDecl* r = p_.schema.find(base.type.record);
        e.field = r->field_index(e.name);
        if (e.field < 0) throw ParseError(e.loc, fmt::format("type '{}' has no field '{}'", r->name, e.name));
        e.type = r->fields[static_cast<std::size_t>(e.field)].type;
        return;
      }
      case Expr::Kind::Unary:
        expr(e.kids[0]);
        if (e.name == "-") {
          if (e.kids[0].type.kind != ScalarKind::Int || e.kids[0].is_null_type) throw ParseError(e.loc, "'-' needs int");
          e.type = ValueType::integer();
        } else {
          if (e.kids[0].type.kind != ScalarKind::Bool) throw ParseError(e.loc, "'!' needs bool");
          e.type = ValueType::boolean();
        }
        return;
      case Expr::Kind::Binary: {
        expr(e.kids[0]);
        expr(e.kids[1]);
        const Expr& l = e.kids[0];
        const Expr& r = e.kids[1];
        auto is = [](const Expr& x, ScalarKind k) { return !x.is_null_type && x.type.kind == k; };
        const std::string& op = e.name;
        if (op == "+" || op == "-" || op == "*") {
          if (!is(l, ScalarKind::Int) || !is(r, ScalarKind::Int)) throw ParseError(e.loc, fmt::format("'{}' needs int operands", op));
          e.type = ValueType::integer();
        } else if (op == "<" || op == "<=" || op == ">" || op == ">=") {
          if (!is(l, ScalarKind::Int) || !is(r, ScalarKind::Int)) throw ParseError(e.loc, fmt::format("'{}' needs int operands", op));
          e.type = ValueType::boolean();
        } else if (op == "&&" || op == "||") {
          if (!is(l, ScalarKind::Bool) || !is(r, ScalarKind::Bool)) throw ParseError(e.loc, fmt::format("'{}' needs bool operands", op));
          e.type = ValueType::boolean();
        } else {
          bool ok = (l.is_null_type && (r.is_null_type || r.type.is_ref())) || (r.is_null_type && l.type.is_ref()) ||
                    (!l.is_null_type && !r.is_null_type && l.type == r.type);
          if (!ok) throw ParseError(e.loc, fmt::format("'{}' compares incompatible types", op));
          e.type = ValueType::boolean();
        }
        return;
      }
    }
  }

  Program& p_;
  Function* fn_ = nullptr;
  std::vector<std::set<std::string>> scopes_;
};

}  // namespace

Program parse_program(std::string_view source, const PredicateRegistry* preds) {
  Program p = Parser(source, preds).program();
  typecheck(p);
  return p;
}

void typecheck(Program& p) { Checker(p).run(); }

// ---------------------------------------------------------------------------
// Printer

std::string print_type(const ValueType& t) { return t.to_string(); }

namespace {

int precedence(const std::string& op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == "<=" || op == ">" || op == ">=") return 4;
  if (op == "+" || op == "-") return 5;
  return 6;
}

std::string expr_prec(const Expr& e, int ctx) {
  switch (e.kind) {
    case Expr::Kind::Int: return std::to_string(e.value);
    case Expr::Kind::Bool: return e.value ? "true" : "false";
    case Expr::Kind::Null: return "null";
    case Expr::Kind::Var: return e.name;
    case Expr::Kind::Field: return expr_prec(e.kids[0], 8) + "." + e.name;
    case Expr::Kind::Unary: return e.name + expr_prec(e.kids[0], 7);
    case Expr::Kind::Binary: {
      int p = precedence(e.name);
      std::string s = fmt::format("{} {} {}", expr_prec(e.kids[0], p), e.name, expr_prec(e.kids[1], p + 1));
      return p < ctx ? "(" + s + ")" : s;
    }
  }
  return "?";
}

std::string join_exprs(const std::vector<Expr>& es) {
  std::vector<std::string> parts;
  for (const auto& e : es) parts.push_back(print_expr(e));
  return fmt::format("{}", fmt::join(parts, ", "));
}

}  // namespace

std::string print_expr(const Expr& e) { return expr_prec(e, 0); }

std::string print_stmt(const Stmt& s, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  auto lhs = [&]() -> std::string {
    if (s.declares) return fmt::format("var {}: {} = ", s.targets[0], print_type(s.decl_type));
    if (s.targets.empty()) return "";
    if (s.targets.size() == 1) return s.targets[0] + " = ";
    return fmt::format("({}) = ", fmt::join(s.targets, ", "));
  };
  auto body = [&](const std::vector<Stmt>& b) {
    std::string out = "{\n";
    for (const auto& x : b) out += print_stmt(x, indent + 1);
    return out + pad + "}";
  };
  switch (s.kind) {
    case Stmt::Kind::VarDecl:
      if (s.value) return fmt::format("{}var {}: {} = {};\n", pad, s.targets[0], print_type(s.decl_type), print_expr(*s.value));
      return fmt::format("{}var {}: {};\n", pad, s.targets[0], print_type(s.decl_type));
    case Stmt::Kind::Assign: return fmt::format("{}{} = {};\n", pad, s.targets[0], print_expr(*s.value));
    case Stmt::Kind::FieldWrite: return fmt::format("{}{} = {};\n", pad, print_expr(s.lhs), print_expr(*s.value));
    case Stmt::Kind::New: return fmt::format("{}{}new {}({});\n", pad, lhs(), s.callee, join_exprs(s.args));
    case Stmt::Kind::Call: return fmt::format("{}{}{}({});\n", pad, lhs(), s.callee, join_exprs(s.args));
    case Stmt::Kind::If: {
      std::string out = fmt::format("{}if ({}) {}", pad, print_expr(*s.value), body(s.body));
      if (!s.else_body.empty()) out += " else " + body(s.else_body);
      return out + "\n";
    }
    case Stmt::Kind::While: return fmt::format("{}while ({}) {}\n", pad, print_expr(*s.value), body(s.body));
    case Stmt::Kind::Return:
      if (s.args.empty()) return pad + "return;\n";
      if (s.args.size() == 1) return fmt::format("{}return {};\n", pad, print_expr(s.args[0]));
      return fmt::format("{}return ({});\n", pad, join_exprs(s.args));
    case Stmt::Kind::Assert: return fmt::format("{}assert {};\n", pad, print_formula(s.formula));
    case Stmt::Kind::Assume: return fmt::format("{}assume {};\n", pad, print_formula(s.formula));
    case Stmt::Kind::Havoc: return fmt::format("{}havoc {};\n", pad, s.targets[0]);
  }
  return "";
}

std::string print_program(const Program& p) {
  std::string out;
  for (const auto& r : p.schema.records()) {
    out += fmt::format("type {} {{", r.name);
    for (const auto& f : r.fields) out += fmt::format(" {}: {};", f.name, print_type(f.type));
    out += " }\n";
  }
  for (const auto& f : p.functions) {
    std::vector<std::string> params;
    for (const auto& v : f.params) params.push_back(fmt::format("{}: {}", v.name, print_type(v.type)));
    out += fmt::format("\nfn {}({})", f.name, fmt::join(params, ", "));
    if (f.returns.size() == 1) out += " -> " + print_type(f.returns[0]);
    if (f.returns.size() > 1) {
      std::vector<std::string> ts;
      for (const auto& t : f.returns) ts.push_back(print_type(t));
      out += fmt::format(" -> ({})", fmt::join(ts, ", "));
    }
    if (f.requires_) out += "\n  requires " + print_formula(*f.requires_);
    if (f.ensures) out += "\n  ensures " + print_formula(*f.ensures);
    out += " {\n";
    for (const auto& s : f.body) out += print_stmt(s, 1);
    out += "}\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Helpers

namespace {

void harvest_expr(const Expr& e, std::set<std::int64_t>& out) {
  if (e.kind == Expr::Kind::Binary) {
    static const std::set<std::string> cmps = {"<", "<=", ">", ">=", "==", "!="};
    if (cmps.contains(e.name)) {
      for (const auto& k : e.kids) {
        if (k.kind == Expr::Kind::Int) out.insert(k.value);
        if (k.kind == Expr::Kind::Unary && k.name == "-" && k.kids[0].kind == Expr::Kind::Int) out.insert(-k.kids[0].value);
      }
    }
  }
  for (const auto& k : e.kids) harvest_expr(k, out);
}

void harvest_stmts(const std::vector<Stmt>& stmts, std::set<std::int64_t>& out) {
  for (const auto& s : stmts) {
    if ((s.kind == Stmt::Kind::If || s.kind == Stmt::Kind::While) && s.value) harvest_expr(*s.value, out);
    harvest_stmts(s.body, out);
    harvest_stmts(s.else_body, out);
  }
}

}  // namespace

std::vector<std::int64_t> harvest_constants(const Program& p) {
  std::set<std::int64_t> out;
  for (const auto& f : p.functions) harvest_stmts(f.body, out);
  return {out.begin(), out.end()};
}

void expr_vars(const Expr& e, std::vector<std::string>& out) {
  if (e.kind == Expr::Kind::Var) {
    if (std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
    return;
  }
  for (const auto& k : e.kids) expr_vars(k, out);
}

}  // namespace slearner
