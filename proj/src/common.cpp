#include "slearner/common.hpp"

#include <fmt/format.h>

namespace slearner {

ParseError::ParseError(SourceLoc loc, const std::string& message)
    : Error(fmt::format("{}:{}: {}", loc.line, loc.column, message)), loc_(loc) {}

char tri_char(Tri t) {
  switch (t) {
    case Tri::Zero: return '0';
    case Tri::One: return '1';
    case Tri::NA: return 'N';
  }
  return '?';
}

Tri tri_from_char(char c) {
  switch (c) {
    case '0': return Tri::Zero;
    case '1': return Tri::One;
    case 'N': return Tri::NA;
    default: throw Error(fmt::format("invalid feature cell '{}'", c));
  }
}

std::string_view label_name(Label l) { return l == Label::Positive ? "positive" : "negative"; }

std::string ValueType::to_string() const {
  switch (kind) {
    case ScalarKind::Int: return "int";
    case ScalarKind::Bool: return "bool";
    case ScalarKind::Ref: return record;
  }
  return "?";
}

int RecordDecl::field_index(std::string_view f) const {
  for (std::size_t i = 0; i < fields.size(); ++i)
    if (fields[i].name == f) return static_cast<int>(i);
  return -1;
}

const FieldDecl* RecordDecl::field(std::string_view f) const {
  int i = field_index(f);
  return i < 0 ? nullptr : &fields[static_cast<std::size_t>(i)];
}

const RecordDecl* Schema::find(std::string_view name) const {
  for (const auto& r : records_)
    if (r.name == name) return &r;
  return nullptr;
}

const TypedVar* find_var(const std::vector<TypedVar>& vars, std::string_view name) {
  for (const auto& v : vars)
    if (v.name == name) return &v;
  return nullptr;
}

std::vector<std::int64_t> IntRange::values() const {
  std::vector<std::int64_t> out;
  for (std::int64_t v = lo; v <= hi; ++v) out.push_back(v);
  return out;
}

}  // namespace slearner
