#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "slearner/learner.hpp"
#include "oracles.hpp"
#include "table3.hpp"

namespace slearner {
namespace {

using testing::table3;

std::vector<std::string> list_pair_header() {
  return {"x = null", "y = null", "x != null", "y != null", "x = y", "x != y", "is_sll(x)", "is_sll(y)"};
}

std::set<std::size_t> as_set(const std::vector<std::size_t>& v) { return {v.begin(), v.end()}; }

std::vector<std::size_t> one_based(std::vector<std::size_t> v) {
  for (auto& k : v) ++k;
  return v;
}

TEST(Learner, NormalizeDropsSameLabelDuplicatesOnly) {
  LabeledMatrix m;
  m.add({Tri::One}, Label::Positive);
  m.add({Tri::One}, Label::Positive);
  m.add({Tri::One}, Label::Negative);
  m.add({Tri::Zero}, Label::Positive);
  auto n = normalize(m);
  ASSERT_EQ(n.rows.size(), 3u);
  EXPECT_EQ(n.labels[0], Label::Positive);
  EXPECT_EQ(n.labels[1], Label::Negative);
  EXPECT_EQ(n.rows[2], FeatureVector{Tri::Zero});
  EXPECT_TRUE(normalize(LabeledMatrix{}).rows.empty());
}

TEST(Learner, TestRowsChooseFirstAndFourthColumn) {
  auto m = table3(4);
  auto K = choose(m);
  EXPECT_EQ(one_based(K), (std::vector<std::size_t>{1, 4}));
  auto regions = combine(m, K);
  ASSERT_EQ(regions.size(), 2u);
  EXPECT_EQ(one_based(regions[0].features), (std::vector<std::size_t>{1}));
  EXPECT_EQ(one_based(regions[1].features), (std::vector<std::size_t>{4}));
  EXPECT_EQ(learn(m).to_string(list_pair_header()), "x = null | y != null");
}

TEST(Learner, SingleDiscriminatingFeature) {
  LabeledMatrix m;
  m.add({Tri::One}, Label::Positive);
  m.add({Tri::Zero}, Label::Negative);
  EXPECT_EQ(choose(m), std::vector<std::size_t>{0});
  auto r = combine(m, {0});
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].features, std::vector<std::size_t>{0});
}

TEST(Learner, FullMatrixFirstPickIsTwelve) {
  auto m = table3();
  auto K = choose(m);
  ASSERT_FALSE(K.empty());
  EXPECT_EQ(K[0] + 1, 12u);
}

TEST(Learner, FullMatrixWithReferenceSelectionFormsThreeRegions) {
  auto m = table3();
  auto regions = combine(m, {0, 11, 20, 23});
  ASSERT_EQ(regions.size(), 3u);
  EXPECT_EQ(as_set(one_based(regions[0].features)), (std::set<std::size_t>{1, 12}));
  EXPECT_EQ(as_set(one_based(regions[1].features)), (std::set<std::size_t>{12, 21}));
  EXPECT_EQ(as_set(one_based(regions[2].features)), (std::set<std::size_t>{12, 24}));
}

TEST(Learner, FullMatrixLearnedFormulaClassifiesEveryRow) {
  auto m = table3();
  auto f = learn(m);
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    EXPECT_EQ(f.holds(m.rows[i]), m.labels[i] == Label::Positive) << "row " << i + 1;
  }
}

TEST(Learner, DegenerateMatrices) {
  LabeledMatrix pos;
  pos.add({Tri::Zero, Tri::One}, Label::Positive);
  EXPECT_TRUE(learn(pos).is_true());
  LabeledMatrix neg;
  neg.add({Tri::Zero, Tri::One}, Label::Negative);
  EXPECT_TRUE(learn(neg).is_false());
  EXPECT_TRUE(learn(LabeledMatrix{}).is_false());
}

TEST(Learner, ConflictingRowsAreInsufficient) {
  LabeledMatrix m;
  m.add({Tri::One, Tri::Zero}, Label::Positive);
  m.add({Tri::One, Tri::Zero}, Label::Negative);
  EXPECT_THROW(choose(normalize(m)), InsufficientFeatures);
}

TEST(Learner, NotApplicableNeverCuts) {
  LabeledMatrix m;
  m.add({Tri::NA}, Label::Positive);
  m.add({Tri::Zero}, Label::Negative);
  EXPECT_THROW(choose(m), InsufficientFeatures);
  LabeledMatrix m2;
  m2.add({Tri::One}, Label::Positive);
  m2.add({Tri::NA}, Label::Negative);
  EXPECT_THROW(choose(m2), InsufficientFeatures);
}

TEST(Learner, RandomMatricesAreClassifiedCorrectly) {
  std::mt19937_64 rng(20240611);
  std::size_t learned = 0;
  for (int iter = 0; iter < 10000; ++iter) {
    auto m = testing::random_matrix(rng, 6, 6);
    if (m.positives() == 0 || m.negatives() == 0) continue;
    ASSERT_EQ(testing::check_learner(m), "") << "matrix " << iter;
    if (testing::separable(m)) ++learned;
  }
  EXPECT_GT(learned, 1000u);
}

TEST(Learner, CombinationLimitIsEnforced) {
  // Eight negatives each with a single zero force a region of all eight
  // features for the all-ones positive.
  LabeledMatrix m;
  m.add(FeatureVector(8, Tri::One), Label::Positive);
  for (std::size_t j = 0; j < 8; ++j) {
    FeatureVector v(8, Tri::One);
    v[j] = Tri::Zero;
    m.add(std::move(v), Label::Negative);
  }
  auto K = choose(m);
  EXPECT_EQ(K.size(), 8u);
  EXPECT_THROW(combine(m, K), LimitExceeded);
}

TEST(Learner, ReportListsOneBasedIndices) {
  auto m = table3(4);
  m.header = list_pair_header();
  m.header.resize(26, "f");
  auto K = choose(m);
  auto report = learn_report(m, K, combine(m, K));
  EXPECT_NE(report.find("chosen: [1,4]"), std::string::npos) << report;
  EXPECT_NE(report.find("regions: {1} {4}"), std::string::npos) << report;
  EXPECT_NE(report.find("formula: x = null | y != null"), std::string::npos) << report;
}

}  // namespace
}  // namespace slearner
