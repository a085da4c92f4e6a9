#pragma once

// Translation of learned feature DNFs into assertion-language formulas.
//
// Each region becomes one symbolic heap. Predicate and points-to shapes on
// distinct variables are joined by `*`; a numeric parameter such as
// len_sll(x) becomes an existential bound by sll(x, a). When a variable has
// both a points-to and a predicate shape, the predicate wins and the
// points-to degrades to `x != null`.

#include <set>
#include <string>

#include "slearner/features.hpp"
#include "slearner/learner.hpp"
#include "slearner/speclang.hpp"

namespace slearner {

/// Translates `dnf` over `catalog`. Existentials are named a, b, c, ...
/// skipping `reserved` (program variable names). Throws Error when a region
/// puts two different predicates on one variable.
Formula translate(const FeatureFormula& dnf, const FeatureCatalog& catalog, const Schema& schema,
                  const std::set<std::string>& reserved = {});

}  // namespace slearner
