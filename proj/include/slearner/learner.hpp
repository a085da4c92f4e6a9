#pragma once

// Learning a DNF over features that separates positive from negative rows:
// greedy feature selection over positive/negative pairs, then combination
// of the selected features into positive regions.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "slearner/features.hpp"

namespace slearner {

/// A conjunction of feature indices (0-based) and the positive rows it
/// covers.
struct Region {
  std::vector<std::size_t> features;
  std::vector<std::size_t> covered;

  friend bool operator==(const Region&, const Region&) = default;
};

using RegionSet = std::vector<Region>;

/// Literal true, literal false, or a disjunction of feature conjunctions.
struct FeatureFormula {
  enum class Kind : std::uint8_t { True, False, Dnf };
  Kind kind = Kind::False;
  std::vector<std::vector<std::size_t>> regions;

  static FeatureFormula truth() { return {Kind::True, {}}; }
  static FeatureFormula falsity() { return {Kind::False, {}}; }

  bool is_true() const { return kind == Kind::True; }
  bool is_false() const { return kind == Kind::False; }
  /// Evaluates on a row; N never satisfies a feature.
  bool holds(const FeatureVector& row) const;
  /// Display form, e.g. `x = null | y != null`; indices are printed 1-based
  /// (`f1 | f4`) without a header.
  std::string to_string(const std::vector<std::string>& header = {}) const;
  /// All feature indices mentioned, ascending.
  std::vector<std::size_t> features() const;

  friend bool operator==(const FeatureFormula&, const FeatureFormula&) = default;
};

/// Removes later rows equal in values and label to an earlier row.
LabeledMatrix normalize(const LabeledMatrix& m);

/// Greedy selection: repeatedly takes the feature cutting the most remaining
/// (positive, negative) pairs; a feature cuts (i, j) iff M[i][k] = 1 and
/// M[j][k] = 0. Ties go to the lowest index. Throws InsufficientFeatures
/// when no feature cuts a remaining pair.
std::vector<std::size_t> choose(const LabeledMatrix& m);

/// Number of pairs in `pairs` cut by each feature.
std::vector<std::size_t> count_cuts(const LabeledMatrix& m, const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

/// Largest combination size tried by `combine`.
inline constexpr std::size_t kMaxCombination = 6;

/// Enumerates combinations of `K` by size then lexicographically (positions
/// in K); keeps admissible combinations covering a new positive and drops
/// earlier regions whose covers are proper subsets. Throws LimitExceeded
/// when full cover needs combinations larger than kMaxCombination.
RegionSet combine(const LabeledMatrix& m, const std::vector<std::size_t>& K);

/// Full pipeline on a normalized matrix.
FeatureFormula learn(const LabeledMatrix& m);

/// Text report: chosen features and regions (1-based), for golden files.
std::string learn_report(const LabeledMatrix& m, const std::vector<std::size_t>& K, const RegionSet& regions);

}  // namespace slearner
