#pragma once

// Feature catalogs over memory graphs and the labeled {0,1,N} matrices
// built from them.
//
// Catalog order (normative):
//   1. IsNull per reference variable
//   2. NonNull per reference variable
//   3. Eq then Neq per unordered pair of reference variables
//   4. PredSat per predicate per argument permutation
//   5. SepCombo per pair of variables, shapes crossed left-major
//      (points-to first, then each applicable predicate)
//   6. NumAtoms over the numeric terms (predicate parameters first, then
//      program numerics): unary `+u > c`, `-u > c`, unary `u = c`, binary
//      `±u ±v > c`, binary `±u ±v = c`; constants outermost in each block.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slearner/common.hpp"
#include "slearner/memgraph.hpp"
#include "slearner/predicates.hpp"

namespace slearner {

struct TypedPath {
  Path path;
  ValueType type;

  friend bool operator==(const TypedPath&, const TypedPath&) = default;
};

/// Shape of one variable inside a SepCombo feature.
struct Shape {
  enum class Kind : std::uint8_t { PointsTo, Pred };
  Kind kind = Kind::PointsTo;
  /// Record type (PointsTo) or predicate name (Pred).
  std::string name;

  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Numeric quantity: a program numeric variable or a predicate parameter
/// such as len_sll(x).
struct NumTerm {
  enum class Kind : std::uint8_t { Var, PredParam };
  Kind kind = Kind::Var;
  /// Var: the variable. PredParam: the predicate's reference arguments.
  std::vector<Path> paths;
  std::string pred;
  std::size_t param = 0;
  std::string display;

  friend bool operator==(const NumTerm&, const NumTerm&) = default;
};

struct FeatureDescriptor {
  enum class Kind : std::uint8_t { IsNull, NonNull, Eq, Neq, PredSat, SepCombo, NumAtom };
  Kind kind = Kind::IsNull;
  std::vector<Path> paths;
  /// PredSat: predicate name. NonNull: record type.
  std::string name;
  /// SepCombo: shapes of paths[0] and paths[1].
  std::vector<Shape> shapes;
  /// NumAtom: (sign, term index) pairs; `sum > constant` or `sum = constant`.
  std::vector<std::pair<int, std::size_t>> terms;
  bool equality = false;
  std::int64_t constant = 0;
  std::string display;

  friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

class FeatureCatalog {
 public:
  FeatureCatalog() = default;
  FeatureCatalog(std::vector<TypedPath> refs, std::vector<TypedPath> nums, std::vector<NumTerm> terms,
                 std::vector<FeatureDescriptor> features)
      : refs_(std::move(refs)), nums_(std::move(nums)), terms_(std::move(terms)), features_(std::move(features)) {}

  std::size_t size() const { return features_.size(); }
  bool empty() const { return features_.empty(); }
  const FeatureDescriptor& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<FeatureDescriptor>& features() const { return features_; }
  const std::vector<NumTerm>& terms() const { return terms_; }
  const std::vector<TypedPath>& ref_vars() const { return refs_; }
  const std::vector<TypedPath>& num_vars() const { return nums_; }

  /// One line per feature: `<1-based index>. <display>`.
  std::string listing() const;
  std::vector<std::string> header() const;

 private:
  std::vector<TypedPath> refs_;
  std::vector<TypedPath> nums_;
  std::vector<NumTerm> terms_;
  std::vector<FeatureDescriptor> features_;
};

/// Builds the catalog. `consts` is extended with 0 and deduplicated.
FeatureCatalog build_catalog(const std::vector<TypedPath>& refs, const std::vector<TypedPath>& nums,
                             std::span<const PredicateDef* const> preds, std::vector<std::int64_t> consts,
                             const Schema& schema);

using FeatureVector = std::vector<Tri>;

/// Evaluates every feature on `g`. Unresolvable paths and failed predicate
/// applications make dependent features N.
FeatureVector evaluate(const FeatureCatalog& catalog, const MemoryGraph& g,
                       const PredicateRegistry& preds = PredicateRegistry::builtin());

// ---------------------------------------------------------------------------

/// Labeled feature matrix; rows align with a catalog's features.
struct LabeledMatrix {
  std::vector<std::string> header;
  std::vector<FeatureVector> rows;
  std::vector<Label> labels;

  std::size_t columns() const { return header.empty() && !rows.empty() ? rows[0].size() : header.size(); }
  std::size_t positives() const;
  std::size_t negatives() const;
  void add(FeatureVector row, Label label);
  /// True if an identical (values, label) row is already present.
  bool contains(const FeatureVector& row, Label label) const;

  /// CSV: header of display strings plus `label`; cells 0/1/N.
  std::string to_csv() const;
  static LabeledMatrix from_csv(std::string_view csv);
};

}  // namespace slearner
