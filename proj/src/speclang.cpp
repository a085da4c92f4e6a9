#include "slearner/speclang.hpp"

#include <algorithm>
#include <cctype>
#include <fmt/format.h>
#include <functional>

namespace slearner {

// ---------------------------------------------------------------------------
// Atoms

LinearExpr LinearExpr::negated() const {
  LinearExpr e;
  for (const auto& [v, c] : coeffs) e.coeffs[v] = -c;
  e.constant = -constant;
  return e;
}

PureAtom PureAtom::normalized() const {
  if (kind != Kind::Linear) return *this;
  PureAtom a = *this;
  std::erase_if(a.expr.coeffs, [](const auto& kv) { return kv.second == 0; });
  if ((cmp == Cmp::Eq || cmp == Cmp::Ne) && !a.expr.coeffs.empty() && a.expr.coeffs.begin()->second < 0)
    a.expr = a.expr.negated();
  return a;
}

bool Formula::is_true() const {
  return disjuncts.size() == 1 && disjuncts[0].exists.empty() && !disjuncts[0].spatial &&
         disjuncts[0].pure.empty();
}

// ---------------------------------------------------------------------------
// Lexer / parser

namespace {

enum class Tok { Ident, Int, LParen, RParen, Comma, Bar, PointsTo, Amp, Star, Dot, Eq, Ne, Lt, Le, Gt, Ge, Plus, Minus, End };

struct Token {
  Tok kind;
  std::string text;
  std::int64_t value = 0;
  SourceLoc loc;
};

class Lexer {
 public:
  Lexer(std::string_view src, SourceLoc base) : src_(src), line_(base.line), col_(base.column) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_ws();
      SourceLoc loc{line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", 0, loc});
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string id;
        while (pos_ < src_.size()) {
          char d = src_[pos_];
          if (std::isalnum(static_cast<unsigned char>(d)) || d == '_') {
            id += d;
            advance();
          } else if (d == '.' && pos_ + 1 < src_.size() &&
                     (std::isalpha(static_cast<unsigned char>(src_[pos_ + 1])) || src_[pos_ + 1] == '_')) {
            id += d;
            advance();
          } else {
            break;
          }
        }
        out.push_back({Tok::Ident, id, 0, loc});
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::int64_t v = 0;
        std::string text;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
          text += src_[pos_];
          v = v * 10 + (src_[pos_] - '0');
          if (v > (std::int64_t{1} << 40)) throw ParseError(loc, "integer literal too large");
          advance();
        }
        out.push_back({Tok::Int, text, v, loc});
      } else {
        auto two = src_.substr(pos_, 2);
        auto three = src_.substr(pos_, 3);
        Tok k;
        std::size_t len = 1;
        if (three == "|->") {
          k = Tok::PointsTo;
          len = 3;
        } else if (two == "==") {
          k = Tok::Eq;
          len = 2;
        } else if (two == "!=") {
          k = Tok::Ne;
          len = 2;
        } else if (two == "<=") {
          k = Tok::Le;
          len = 2;
        } else if (two == ">=") {
          k = Tok::Ge;
          len = 2;
        } else {
          switch (c) {
            case '(': k = Tok::LParen; break;
            case ')': k = Tok::RParen; break;
            case ',': k = Tok::Comma; break;
            case '|': k = Tok::Bar; break;
            case '&': k = Tok::Amp; break;
            case '*': k = Tok::Star; break;
            case '.': k = Tok::Dot; break;
            case '=': k = Tok::Eq; break;
            case '<': k = Tok::Lt; break;
            case '>': k = Tok::Gt; break;
            case '+': k = Tok::Plus; break;
            case '-': k = Tok::Minus; break;
            default: throw ParseError(loc, fmt::format("unexpected character '{}'", c));
          }
        }
        std::string text(src_.substr(pos_, len));
        for (std::size_t i = 0; i < len; ++i) advance();
        out.push_back({k, text, 0, loc});
      }
    }
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_;
  int col_;
};

bool is_keyword(const std::string& s) {
  return s == "exists" || s == "emp" || s == "true" || s == "false" || s == "null";
}

class Parser {
 public:
  Parser(std::vector<Token> toks, const PredicateRegistry* preds) : toks_(std::move(toks)), preds_(preds) {}

  Formula formula() {
    Formula f;
    f.disjuncts.push_back(heap());
    while (accept(Tok::Bar)) f.disjuncts.push_back(heap());
    if (peek().kind != Tok::End) fail(peek(), fmt::format("unexpected '{}'", peek().text));
    // A lone `false` heap denotes the empty disjunction.
    std::erase_if(f.disjuncts, [](const SymbolicHeap& h) {
      return h.pure.size() == 1 && h.pure[0].kind == PureAtom::Kind::False && !h.spatial && h.exists.empty();
    });
    return f;
  }

 private:
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool accept(Tok k) {
    if (peek().kind != k) return false;
    ++pos_;
    return true;
  }
  const Token& expect(Tok k, std::string_view what) {
    if (peek().kind != k) fail(peek(), fmt::format("expected {}", what));
    return next();
  }
  [[noreturn]] void fail(const Token& t, const std::string& msg) const {
    throw ParseError(t.loc, t.kind == Tok::End ? msg + " at end of formula" : msg);
  }
  bool is_ident(std::string_view s) const { return peek().kind == Tok::Ident && peek().text == s; }

  SymbolicHeap heap() {
    SymbolicHeap h;
    if (is_ident("exists")) {
      next();
      while (true) {
        const Token& t = expect(Tok::Ident, "existential variable");
        auto dot = t.text.find('.');
        if (dot != std::string::npos) {
          // `exists a.sll(...)`: the lexer glued the binder dot to the body.
          h.exists.push_back(t.text.substr(0, dot));
          --pos_;
          toks_[pos_].text = t.text.substr(dot + 1);
          break;
        }
        if (is_keyword(t.text) || t.text == "_") fail(t, fmt::format("invalid existential name '{}'", t.text));
        h.exists.push_back(t.text);
        if (accept(Tok::Comma)) continue;
        expect(Tok::Dot, "'.' after existential variables");
        break;
      }
      auto sorted = h.exists;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        fail(peek(), "existential variable bound twice");
    }
    conjunct(h);
    while (accept(Tok::Amp)) conjunct(h);
    return h;
  }

  bool spatial_start() const {
    if (peek().kind != Tok::Ident) return false;
    if (peek().text == "emp") return true;
    if (is_keyword(peek().text)) return false;
    return peek(1).kind == Tok::PointsTo || peek(1).kind == Tok::LParen;
  }

  void conjunct(SymbolicHeap& h) {
    if (is_ident("true")) {
      next();
      return;
    }
    if (is_ident("false")) {
      next();
      h.pure.push_back(PureAtom::falsum());
      return;
    }
    if (spatial_start()) {
      const Token& start = peek();
      if (h.spatial) fail(start, "spatial parts must be joined with '*'");
      std::vector<SpatialAtom> atoms;
      do {
        if (is_ident("emp")) {
          next();
          continue;
        }
        atoms.push_back(spatial());
      } while (accept(Tok::Star));
      h.spatial = std::move(atoms);
      return;
    }
    h.pure.push_back(pure());
  }

  SpatialAtom spatial() {
    const Token& id = expect(Tok::Ident, "spatial atom");
    if (accept(Tok::PointsTo)) {
      const Token& type = expect(Tok::Ident, "record type");
      expect(Tok::LParen, "'('");
      auto a = args();
      return SpatialAtom::points_to(id.text, type.text, std::move(a));
    }
    expect(Tok::LParen, "'('");
    auto a = args();
    if (preds_) {
      const PredicateDef* def = preds_->find(id.text);
      if (!def) fail(id, fmt::format("unknown predicate '{}'", id.text));
      if (a.size() != def->arity())
        fail(id, fmt::format("predicate '{}' expects {} argument(s), got {}", id.text, def->arity(), a.size()));
    }
    return SpatialAtom::pred(id.text, std::move(a));
  }

  std::vector<Arg> args() {
    std::vector<Arg> out;
    if (accept(Tok::RParen)) return out;
    while (true) {
      if (accept(Tok::Minus)) {
        out.push_back(Arg::integer(-expect(Tok::Int, "integer").value));
      } else if (peek().kind == Tok::Int) {
        out.push_back(Arg::integer(next().value));
      } else {
        const Token& t = expect(Tok::Ident, "argument");
        if (t.text == "_")
          out.push_back(Arg::wildcard());
        else if (t.text == "null")
          out.push_back(Arg::null());
        else if (is_keyword(t.text))
          fail(t, fmt::format("unexpected '{}'", t.text));
        else
          out.push_back(Arg::var(t.text));
      }
      if (accept(Tok::RParen)) return out;
      expect(Tok::Comma, "',' or ')'");
    }
  }

  // A side of a comparison: either `null` or a linear expression.
  struct Side {
    bool is_null = false;
    LinearExpr expr;
  };

  Side side() {
    if (is_ident("null")) {
      next();
      return {true, {}};
    }
    Side s;
    std::int64_t sign = accept(Tok::Minus) ? -1 : 1;
    term(s.expr, sign);
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      sign = next().kind == Tok::Plus ? 1 : -1;
      term(s.expr, sign);
    }
    return s;
  }

  void term(LinearExpr& e, std::int64_t sign) {
    if (peek().kind == Tok::Int) {
      std::int64_t k = next().value;
      if (accept(Tok::Star)) {
        const Token& v = expect(Tok::Ident, "variable");
        if (is_keyword(v.text) || v.text == "_") fail(v, fmt::format("unexpected '{}'", v.text));
        e.coeffs[v.text] += sign * k;
      } else {
        e.constant += sign * k;
      }
      return;
    }
    const Token& v = expect(Tok::Ident, "term");
    if (is_keyword(v.text) || v.text == "_") fail(v, fmt::format("unexpected '{}'", v.text));
    e.coeffs[v.text] += sign;
  }

  PureAtom pure() {
    const Token& start = peek();
    Side lhs = side();
    const Token& op = next();
    Side rhs = side();
    if (lhs.is_null || rhs.is_null) {
      if (op.kind != Tok::Eq && op.kind != Tok::Ne) fail(op, "null only compares with = or !=");
      if (lhs.is_null && rhs.is_null) return op.kind == Tok::Eq ? PureAtom::linear({}, Cmp::Eq) : PureAtom::falsum();
      const LinearExpr& e = lhs.is_null ? rhs.expr : lhs.expr;
      if (e.constant != 0 || e.coeffs.size() != 1 || e.coeffs.begin()->second != 1)
        fail(start, "null comparison requires a single variable");
      return PureAtom::null_test(e.coeffs.begin()->first, op.kind == Tok::Eq);
    }
    LinearExpr diff = lhs.expr;
    for (const auto& [v, c] : rhs.expr.coeffs) diff.coeffs[v] -= c;
    diff.constant -= rhs.expr.constant;
    switch (op.kind) {
      case Tok::Eq: return PureAtom::linear(diff, Cmp::Eq).normalized();
      case Tok::Ne: return PureAtom::linear(diff, Cmp::Ne).normalized();
      case Tok::Le: return PureAtom::linear(diff, Cmp::Le).normalized();
      case Tok::Lt: return PureAtom::linear(diff, Cmp::Lt).normalized();
      case Tok::Ge: return PureAtom::linear(diff.negated(), Cmp::Le).normalized();
      case Tok::Gt: return PureAtom::linear(diff.negated(), Cmp::Lt).normalized();
      default: fail(op, "expected comparison operator");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const PredicateRegistry* preds_;
};

}  // namespace

Formula parse_formula(std::string_view text, const PredicateRegistry* preds, SourceLoc base) {
  Parser p(Lexer(text, base).run(), preds);
  return p.formula();
}

// ---------------------------------------------------------------------------
// Printer

namespace {

std::string print_arg(const Arg& a) {
  switch (a.kind) {
    case Arg::Kind::Var: return a.name;
    case Arg::Kind::Wildcard: return "_";
    case Arg::Kind::Null: return "null";
    case Arg::Kind::Int: return std::to_string(a.value);
  }
  return "?";
}

std::string print_spatial(const SpatialAtom& s) {
  std::string args;
  for (std::size_t i = 0; i < s.args.size(); ++i) {
    if (i) args += ',';
    args += print_arg(s.args[i]);
  }
  if (s.kind == SpatialAtom::Kind::PointsTo) return fmt::format("{} |-> {}({})", s.root, s.name, args);
  return fmt::format("{}({})", s.name, args);
}

std::string print_terms(const std::vector<std::pair<std::string, std::int64_t>>& terms, std::int64_t constant) {
  std::string out;
  for (const auto& [v, c] : terms) {
    if (!out.empty()) out += " + ";
    out += c == 1 ? v : fmt::format("{}*{}", c, v);
  }
  if (out.empty()) return std::to_string(constant);
  if (constant > 0) out += fmt::format(" + {}", constant);
  if (constant < 0) out += fmt::format(" - {}", -constant);
  return out;
}

}  // namespace

std::string print_pure(const PureAtom& a) {
  switch (a.kind) {
    case PureAtom::Kind::False: return "false";
    case PureAtom::Kind::NullTest: return fmt::format("{} {} null", a.var, a.is_null ? "=" : "!=");
    case PureAtom::Kind::Linear: break;
  }
  std::vector<std::pair<std::string, std::int64_t>> pos, neg;
  for (const auto& [v, c] : a.expr.coeffs) {
    if (c > 0) pos.emplace_back(v, c);
    if (c < 0) neg.emplace_back(v, -c);
  }
  static constexpr std::string_view ops[] = {"=", "!=", "<=", "<"};
  static constexpr std::string_view flipped[] = {"=", "!=", ">=", ">"};
  const auto idx = static_cast<std::size_t>(a.cmp);
  const std::int64_t c = a.expr.constant;
  if (!pos.empty()) return fmt::format("{} {} {}", print_terms(pos, 0), ops[idx], print_terms(neg, -c));
  if (!neg.empty()) return fmt::format("{} {} {}", print_terms(neg, 0), flipped[idx], print_terms({}, c));
  return fmt::format("{} {} 0", c, ops[idx]);
}

std::string print_heap(const SymbolicHeap& h) {
  std::vector<std::string> parts;
  if (h.spatial) {
    if (h.spatial->empty()) {
      parts.emplace_back("emp");
    } else {
      std::string s;
      for (std::size_t i = 0; i < h.spatial->size(); ++i) {
        if (i) s += " * ";
        s += print_spatial((*h.spatial)[i]);
      }
      parts.push_back(std::move(s));
    }
  }
  for (const auto& a : h.pure) parts.push_back(print_pure(a));
  std::string body = parts.empty() ? "true" : fmt::format("{}", fmt::join(parts, " & "));
  if (h.exists.empty()) return body;
  return fmt::format("exists {}. {}", fmt::join(h.exists, ","), body);
}

std::string print_formula(const Formula& f) {
  if (f.disjuncts.empty()) return "false";
  std::vector<std::string> parts;
  for (const auto& h : f.disjuncts) parts.push_back(print_heap(h));
  return fmt::format("{}", fmt::join(parts, " | "));
}

// ---------------------------------------------------------------------------
// Variables and substitution

namespace {

void visit_names(const SymbolicHeap& h, const std::function<void(const std::string&)>& fn) {
  if (h.spatial) {
    for (const auto& s : *h.spatial) {
      if (s.kind == SpatialAtom::Kind::PointsTo) fn(s.root);
      for (const auto& a : s.args)
        if (a.kind == Arg::Kind::Var) fn(a.name);
    }
  }
  for (const auto& p : h.pure) {
    if (p.kind == PureAtom::Kind::NullTest) fn(p.var);
    if (p.kind == PureAtom::Kind::Linear)
      for (const auto& [v, _] : p.expr.coeffs) fn(v);
  }
}

void rename_names(SymbolicHeap& h, const std::function<std::string(const std::string&)>& fn) {
  if (h.spatial) {
    for (auto& s : *h.spatial) {
      if (s.kind == SpatialAtom::Kind::PointsTo) s.root = fn(s.root);
      for (auto& a : s.args)
        if (a.kind == Arg::Kind::Var) a.name = fn(a.name);
    }
  }
  for (auto& p : h.pure) {
    if (p.kind == PureAtom::Kind::NullTest) p.var = fn(p.var);
    if (p.kind == PureAtom::Kind::Linear) {
      std::map<std::string, std::int64_t> coeffs;
      for (const auto& [v, c] : p.expr.coeffs) coeffs[fn(v)] += c;
      p.expr.coeffs = std::move(coeffs);
      p = p.normalized();
    }
  }
}

std::string root_of(const std::string& name) { return name.substr(0, name.find('.')); }

}  // namespace

std::set<std::string> free_vars(const SymbolicHeap& h) {
  std::set<std::string> out;
  visit_names(h, [&](const std::string& n) {
    if (std::find(h.exists.begin(), h.exists.end(), root_of(n)) == h.exists.end()) out.insert(n);
  });
  return out;
}

std::set<std::string> free_vars(const Formula& f) {
  std::set<std::string> out;
  for (const auto& h : f.disjuncts) out.merge(free_vars(h));
  return out;
}

std::set<std::string> free_roots(const Formula& f) {
  std::set<std::string> out;
  for (const auto& v : free_vars(f)) out.insert(root_of(v));
  return out;
}

Formula substitute(const Formula& f, const std::string& from, const std::string& to) {
  Formula out = f;
  for (auto& h : out.disjuncts) {
    if (std::find(h.exists.begin(), h.exists.end(), from) != h.exists.end()) continue;
    auto captured = std::find(h.exists.begin(), h.exists.end(), root_of(to));
    if (captured != h.exists.end()) {
      std::set<std::string> used;
      visit_names(h, [&](const std::string& n) { used.insert(root_of(n)); });
      std::string fresh;
      for (int i = 1;; ++i) {
        fresh = fmt::format("{}{}", *captured, i);
        if (!used.contains(fresh) && fresh != root_of(to)) break;
      }
      const std::string old = *captured;
      *captured = fresh;
      rename_names(h, [&](const std::string& n) { return n == old ? fresh : n; });
    }
    rename_names(h, [&](const std::string& n) {
      if (n == from) return to;
      if (n.size() > from.size() && n.compare(0, from.size(), from) == 0 && n[from.size()] == '.')
        return to + n.substr(from.size());
      return n;
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

// Returns false when the heap is trivially contradictory.
bool clean_heap(SymbolicHeap& h) {
  std::vector<PureAtom> pure;
  for (const auto& raw : h.pure) {
    PureAtom a = raw.normalized();
    if (a.kind == PureAtom::Kind::False) return false;
    if (a.kind == PureAtom::Kind::Linear && a.expr.coeffs.empty()) {
      const auto c = a.expr.constant;
      bool holds = a.cmp == Cmp::Eq ? c == 0 : a.cmp == Cmp::Ne ? c != 0 : a.cmp == Cmp::Le ? c <= 0 : c < 0;
      if (!holds) return false;
      continue;
    }
    if (std::find(pure.begin(), pure.end(), a) == pure.end()) pure.push_back(std::move(a));
  }
  for (const auto& a : pure) {
    if (a.kind != PureAtom::Kind::NullTest) continue;
    for (const auto& b : pure)
      if (b.kind == PureAtom::Kind::NullTest && b.var == a.var && b.is_null != a.is_null) return false;
  }
  h.pure = std::move(pure);

  // Existentials: drop unused ones, turn single spatial uses into `_`.
  std::map<std::string, int> uses, pure_uses;
  visit_names(h, [&](const std::string& n) { ++uses[n]; });
  for (const auto& p : h.pure)
    if (p.kind == PureAtom::Kind::Linear)
      for (const auto& [v, _] : p.expr.coeffs) ++pure_uses[v];
  std::vector<std::string> kept;
  for (const auto& e : h.exists) {
    if (uses[e] == 0) continue;
    if (uses[e] == 1 && pure_uses[e] == 0 && h.spatial) {
      for (auto& s : *h.spatial)
        if (s.kind == SpatialAtom::Kind::Pred)
          for (auto& a : s.args)
            if (a.kind == Arg::Kind::Var && a.name == e) a = Arg::wildcard();
      continue;
    }
    kept.push_back(e);
  }
  h.exists = std::move(kept);
  return true;
}

std::vector<PureAtom> sorted_pure(const SymbolicHeap& h) {
  auto p = h.pure;
  std::sort(p.begin(), p.end());
  return p;
}

// If `a` and `b` differ only in one atom `L < 0` vs `L = 0` (or `-L = 0`),
// returns `a` with that atom replaced by `L <= 0`.
std::optional<SymbolicHeap> merge_pair(const SymbolicHeap& a, const SymbolicHeap& b) {
  if (a.exists != b.exists || a.spatial != b.spatial || a.pure.size() != b.pure.size()) return std::nullopt;
  for (std::size_t i = 0; i < a.pure.size(); ++i) {
    const PureAtom& x = a.pure[i];
    if (x.kind != PureAtom::Kind::Linear || (x.cmp != Cmp::Lt && x.cmp != Cmp::Eq)) continue;
    for (std::size_t j = 0; j < b.pure.size(); ++j) {
      const PureAtom& y = b.pure[j];
      if (y.kind != PureAtom::Kind::Linear || (y.cmp != Cmp::Lt && y.cmp != Cmp::Eq) || y.cmp == x.cmp) continue;
      const PureAtom& strict = x.cmp == Cmp::Lt ? x : y;
      const PureAtom& eq = x.cmp == Cmp::Lt ? y : x;
      if (eq.expr != strict.expr && eq.expr != strict.expr.negated()) continue;
      auto ra = a.pure;
      auto rb = b.pure;
      ra.erase(ra.begin() + static_cast<std::ptrdiff_t>(i));
      rb.erase(rb.begin() + static_cast<std::ptrdiff_t>(j));
      std::sort(ra.begin(), ra.end());
      std::sort(rb.begin(), rb.end());
      if (ra != rb) continue;
      SymbolicHeap out = a;
      out.pure[i] = PureAtom::linear(strict.expr, Cmp::Le);
      return out;
    }
  }
  return std::nullopt;
}

bool same_heap(const SymbolicHeap& a, const SymbolicHeap& b) {
  return a.exists == b.exists && a.spatial == b.spatial && sorted_pure(a) == sorted_pure(b);
}

}  // namespace

Formula simplify(const Formula& f) {
  std::vector<SymbolicHeap> heaps;
  for (auto h : f.disjuncts) {
    if (!clean_heap(h)) continue;
    heaps.push_back(std::move(h));
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < heaps.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < heaps.size() && !changed; ++j) {
        if (same_heap(heaps[i], heaps[j])) {
          heaps.erase(heaps.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
        } else if (auto m = merge_pair(heaps[i], heaps[j])) {
          heaps[i] = std::move(*m);
          clean_heap(heaps[i]);
          heaps.erase(heaps.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
        }
      }
    }
  }
  for (const auto& h : heaps)
    if (h.exists.empty() && !h.spatial && h.pure.empty()) return Formula::truth();
  return Formula{std::move(heaps)};
}

// ---------------------------------------------------------------------------
// Satisfaction

namespace {

struct HeapEval {
  const MemoryGraph& g;
  const SymbolicHeap& h;
  const ModelContext& ctx;
  std::map<std::string, std::int64_t> bound;

  bool is_exists(const std::string& n) const {
    return std::find(h.exists.begin(), h.exists.end(), n) != h.exists.end();
  }

  std::optional<NodeId> lookup(const std::string& name) const { return resolve(g, Path::parse(name)); }

  bool bind(const std::string& name, std::int64_t v) {
    auto [it, inserted] = bound.emplace(name, v);
    return inserted || it->second == v;
  }

  // Matches a numeric argument against a concrete value.
  bool numeric_arg(const Arg& a, std::int64_t v) {
    switch (a.kind) {
      case Arg::Kind::Wildcard: return true;
      case Arg::Kind::Null: return false;
      case Arg::Kind::Int: return a.value == v;
      case Arg::Kind::Var: {
        if (is_exists(a.name)) return bind(a.name, v);
        auto n = lookup(a.name);
        return n && g.is_value(*n) && *g.value(*n) == v;
      }
    }
    return false;
  }

  std::optional<NodeId> ref_arg(const Arg& a) const {
    if (a.kind == Arg::Kind::Null) return kNullNode;
    if (a.kind != Arg::Kind::Var || is_exists(a.name)) return std::nullopt;
    auto n = lookup(a.name);
    if (!n || g.is_value(*n)) return std::nullopt;
    return n;
  }

  bool atom(const SpatialAtom& s, std::vector<NodeId>& fp) {
    if (s.kind == SpatialAtom::Kind::Pred) {
      const PredicateDef* def = ctx.preds ? ctx.preds->find(s.name) : nullptr;
      if (!def || s.args.size() != def->arity()) return false;
      std::vector<NodeId> refs;
      for (std::size_t i = 0; i < def->ref_arity; ++i) {
        auto n = ref_arg(s.args[i]);
        if (!n) return false;
        refs.push_back(*n);
      }
      auto m = eval(*def, g, refs);
      if (!m) return false;
      for (std::size_t i = 0; i < def->numeric_params.size(); ++i)
        if (!numeric_arg(s.args[def->ref_arity + i], m->numerics[i])) return false;
      fp = std::move(m->footprint);
      return true;
    }
    if (is_exists(s.root)) return false;
    auto n = lookup(s.root);
    if (!n || !g.is_record(*n) || g.type(*n) != s.name) return false;
    std::vector<std::string> fields;
    const RecordDecl* decl = ctx.schema ? ctx.schema->find(s.name) : nullptr;
    if (decl) {
      for (const auto& f : decl->fields) fields.push_back(f.name);
    } else {
      for (const auto& e : g.edges(*n)) fields.push_back(e.label);
    }
    if (fields.size() != s.args.size()) return false;
    fp.push_back(*n);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      auto t = g.target(*n, fields[i]);
      if (!t) return false;
      const Arg& a = s.args[i];
      if (g.is_value(*t)) {
        fp.push_back(*t);
        if (!numeric_arg(a, *g.value(*t))) return false;
        continue;
      }
      switch (a.kind) {
        case Arg::Kind::Wildcard:
          for (NodeId r : g.reach(*t)) fp.push_back(r);
          break;
        case Arg::Kind::Null:
          if (*t != kNullNode) return false;
          break;
        case Arg::Kind::Int: return false;
        case Arg::Kind::Var: {
          auto v = ref_arg(a);
          if (!v || *v != *t) return false;
          break;
        }
      }
    }
    std::sort(fp.begin(), fp.end());
    fp.erase(std::unique(fp.begin(), fp.end()), fp.end());
    return true;
  }

  bool spatial_ok() {
    if (!h.spatial) return true;
    std::vector<NodeId> used;
    for (const auto& s : *h.spatial) {
      std::vector<NodeId> fp;
      if (!atom(s, fp)) return false;
      std::vector<NodeId> overlap;
      std::set_intersection(used.begin(), used.end(), fp.begin(), fp.end(), std::back_inserter(overlap));
      if (!overlap.empty()) return false;
      std::vector<NodeId> merged;
      std::merge(used.begin(), used.end(), fp.begin(), fp.end(), std::back_inserter(merged));
      used = std::move(merged);
    }
    for (const auto& v : free_vars(h)) {
      auto n = lookup(v);
      if (!n || !g.is_record(*n)) continue;
      for (NodeId r : g.reach(*n))
        if (!std::binary_search(used.begin(), used.end(), r)) return false;
    }
    return true;
  }

  // Evaluates a pure atom; existentials must all be bound.
  bool pure_atom(const PureAtom& a) const {
    switch (a.kind) {
      case PureAtom::Kind::False: return false;
      case PureAtom::Kind::NullTest: {
        auto n = lookup(a.var);
        if (!n || g.is_value(*n)) return false;
        return a.is_null == (*n == kNullNode);
      }
      case PureAtom::Kind::Linear: break;
    }
    std::int64_t sum = a.expr.constant;
    std::vector<std::pair<NodeId, std::int64_t>> refs;
    for (const auto& [v, c] : a.expr.coeffs) {
      if (is_exists(v)) {
        sum += c * bound.at(v);
        continue;
      }
      auto n = lookup(v);
      if (!n) return false;
      if (g.is_value(*n)) {
        sum += c * *g.value(*n);
      } else {
        refs.emplace_back(*n, c);
      }
    }
    if (!refs.empty()) {
      if (refs.size() != 2 || a.expr.coeffs.size() != 2 || a.expr.constant != 0 || refs[0].second != -refs[1].second ||
          (refs[0].second != 1 && refs[0].second != -1))
        return false;
      if (a.cmp == Cmp::Eq) return refs[0].first == refs[1].first;
      if (a.cmp == Cmp::Ne) return refs[0].first != refs[1].first;
      return false;
    }
    switch (a.cmp) {
      case Cmp::Eq: return sum == 0;
      case Cmp::Ne: return sum != 0;
      case Cmp::Le: return sum <= 0;
      case Cmp::Lt: return sum < 0;
    }
    return false;
  }

  bool pure_ok() {
    std::vector<std::string> open;
    for (const auto& e : h.exists)
      if (!bound.contains(e)) open.push_back(e);
    const auto values = ctx.num_bound.values();
    std::function<bool(std::size_t)> search = [&](std::size_t i) -> bool {
      if (i == open.size()) {
        for (const auto& a : h.pure)
          if (!pure_atom(a)) return false;
        return true;
      }
      for (auto v : values) {
        bound[open[i]] = v;
        if (search(i + 1)) return true;
      }
      bound.erase(open[i]);
      return false;
    };
    return search(0);
  }
};

}  // namespace

bool models(const MemoryGraph& g, const SymbolicHeap& h, const ModelContext& ctx) {
  HeapEval ev{g, h, ctx, {}};
  return ev.spatial_ok() && ev.pure_ok();
}

bool models(const MemoryGraph& g, const Formula& f, const ModelContext& ctx) {
  for (const auto& h : f.disjuncts)
    if (models(g, h, ctx)) return true;
  return false;
}

std::optional<MemoryGraph> sat_bounded(const Formula& f, const GraphSpace& space, const ModelContext& ctx) {
  std::optional<MemoryGraph> witness;
  if (f.is_false()) return witness;
  enumerate_graphs(space, [&](const MemoryGraph& g) {
    if (models(g, f, ctx)) {
      witness = g;
      return false;
    }
    return true;
  });
  return witness;
}

}  // namespace slearner
