#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace slearner {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SourceLoc {
  int line = 0;
  int column = 0;
};

/// Syntax, name-resolution and typing errors in `.hl` sources and formulas.
class ParseError : public Error {
 public:
  ParseError(SourceLoc loc, const std::string& message);
  SourceLoc loc() const { return loc_; }

 private:
  SourceLoc loc_;
};

/// Raised when the greedy feature selection can no longer cut any
/// positive/negative pair.
class InsufficientFeatures : public Error {
 public:
  using Error::Error;
};

/// Raised when a configured hard limit (combination size, ...) is hit.
class LimitExceeded : public Error {
 public:
  using Error::Error;
};

/// Three-valued feature cell. `NA` is the "not applicable" value and never
/// counts as satisfied.
enum class Tri : std::uint8_t { Zero = 0, One = 1, NA = 2 };

char tri_char(Tri t);
Tri tri_from_char(char c);

enum class Label : std::uint8_t { Positive, Negative };

std::string_view label_name(Label l);

// ---------------------------------------------------------------------------
// Record schema shared by the interpreter, the memory graphs and the
// enumerators.

enum class ScalarKind : std::uint8_t { Int, Bool, Ref };

/// Static type of a variable or a field: int, bool, or a reference to a
/// named record type.
struct ValueType {
  ScalarKind kind = ScalarKind::Int;
  std::string record;

  static ValueType integer() { return {ScalarKind::Int, {}}; }
  static ValueType boolean() { return {ScalarKind::Bool, {}}; }
  static ValueType ref(std::string name) { return {ScalarKind::Ref, std::move(name)}; }

  bool is_ref() const { return kind == ScalarKind::Ref; }
  bool is_numeric() const { return kind != ScalarKind::Ref; }
  std::string to_string() const;

  friend bool operator==(const ValueType&, const ValueType&) = default;
};

struct FieldDecl {
  std::string name;
  ValueType type;
};

struct RecordDecl {
  std::string name;
  std::vector<FieldDecl> fields;

  /// Index of `field` in declaration order, or -1.
  int field_index(std::string_view field) const;
  const FieldDecl* field(std::string_view field) const;
};

class Schema {
 public:
  Schema() = default;
  explicit Schema(std::vector<RecordDecl> records) : records_(std::move(records)) {}

  const RecordDecl* find(std::string_view name) const;
  const std::vector<RecordDecl>& records() const { return records_; }
  void add(RecordDecl r) { records_.push_back(std::move(r)); }

 private:
  std::vector<RecordDecl> records_;
};

/// A named, typed variable (program variable or formula variable).
struct TypedVar {
  std::string name;
  ValueType type;

  friend bool operator==(const TypedVar&, const TypedVar&) = default;
};

const TypedVar* find_var(const std::vector<TypedVar>& vars, std::string_view name);

/// Inclusive integer range used for bounded numeric domains.
struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  std::vector<std::int64_t> values() const;
  bool contains(std::int64_t v) const { return v >= lo && v <= hi; }
  std::size_t size() const { return hi < lo ? 0 : static_cast<std::size_t>(hi - lo + 1); }
};

}  // namespace slearner
