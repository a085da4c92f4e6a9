#pragma once

// A small imperative heap language.
//
//   type Node { data: int; next: Node; }
//   fn main(m: int, n: int) requires m <= n ensures sll(x,_) * sll(y,_) {
//     var x: Node = createSLL(m); ...
//   }
//
// Statements: `var x: T [= e | new R(..) | f(..)];`, `x = e;`, `x.f = e;`,
// `x = new R(..);`, `x = f(..);`, `f(..);`, `(a, b) = f(..);`,
// `if (e) {..} [else {..}]`, `while (e) {..}`, `return [e | (e, ..)];`,
// `assert F;`, `assume F;`, `havoc x;`. Calls only occur at statement level.
// The entry function is `main`; `res` names the result in `ensures`.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slearner/common.hpp"
#include "slearner/predicates.hpp"
#include "slearner/speclang.hpp"

namespace slearner {

struct Expr {
  enum class Kind : std::uint8_t { Int, Bool, Null, Var, Field, Unary, Binary };
  Kind kind = Kind::Int;
  SourceLoc loc;
  std::int64_t value = 0;
  /// Var: variable name. Field: field name. Unary/Binary: operator.
  std::string name;
  /// Field: [base]; Unary: [operand]; Binary: [lhs, rhs].
  std::vector<Expr> kids;

  // Filled in by the type checker.
  int slot = -1;
  int field = -1;
  ValueType type;
  bool is_null_type = false;

  static Expr integer(std::int64_t v, SourceLoc loc = {});
  static Expr boolean(bool v, SourceLoc loc = {});
  static Expr null(SourceLoc loc = {});
  static Expr var(std::string name, SourceLoc loc = {});
  static Expr field_of(Expr base, std::string field, SourceLoc loc = {});
  static Expr unary(std::string op, Expr e, SourceLoc loc = {});
  static Expr binary(std::string op, Expr l, Expr r, SourceLoc loc = {});
};

struct Stmt {
  enum class Kind : std::uint8_t {
    VarDecl,     // var x: T [= value];
    Assign,      // x = value;
    FieldWrite,  // lhs = value; (lhs is a Field expression)
    New,         // [var] x = new R(args);
    Call,        // [var] [targets =] f(args);
    If,
    While,
    Return,  // return args...;
    Assert,
    Assume,
    Havoc,
  };
  Kind kind = Kind::VarDecl;
  SourceLoc loc;

  /// Assigned variables (VarDecl/Assign/New/Call/Havoc).
  std::vector<std::string> targets;
  /// New/Call written as `var x: T = ...`.
  bool declares = false;
  ValueType decl_type;

  Expr lhs;
  /// VarDecl init, Assign/FieldWrite value, If/While condition.
  std::optional<Expr> value;
  /// Call: callee function. New: record type.
  std::string callee;
  /// Call/New arguments; Return values.
  std::vector<Expr> args;
  std::vector<Stmt> body;
  std::vector<Stmt> else_body;
  /// Assert/Assume.
  Formula formula;

  // Filled in by the type checker.
  std::vector<int> target_slots;
  int callee_index = -1;

  bool is_call() const { return kind == Kind::Call; }
};

struct Function {
  std::string name;
  SourceLoc loc;
  std::vector<TypedVar> params;
  std::vector<ValueType> returns;
  std::optional<Formula> requires_;
  std::optional<Formula> ensures;
  std::vector<Stmt> body;

  /// Every variable of the function: parameters first, then declarations
  /// in source order. Filled in by the type checker.
  std::vector<TypedVar> slots;

  int slot_of(std::string_view var) const;
};

struct Program {
  Schema schema;
  std::vector<Function> functions;
  int entry = -1;

  const Function& main() const { return functions[static_cast<std::size_t>(entry)]; }
  const Function* find(std::string_view name) const;
  int index_of(std::string_view name) const;
};

/// Parses and type-checks a `.hl` source. Throws ParseError.
Program parse_program(std::string_view source, const PredicateRegistry* preds = &PredicateRegistry::builtin());

/// Resolves names and types in place; used again after program transforms.
void typecheck(Program& p);

std::string print_program(const Program& p);
std::string print_stmt(const Stmt& s, int indent = 0);
std::string print_expr(const Expr& e);
std::string print_type(const ValueType& t);

/// Integer literals of comparisons in `if`/`while` conditions, ascending.
std::vector<std::int64_t> harvest_constants(const Program& p);

/// Variables read by an expression (roots of field accesses included).
void expr_vars(const Expr& e, std::vector<std::string>& out);

}  // namespace slearner
