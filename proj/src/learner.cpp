#include "slearner/learner.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

namespace slearner {

namespace {

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

std::vector<std::size_t> rows_with(const LabeledMatrix& m, Label l) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    if (m.labels[i] == l) out.push_back(i);
  }
  return out;
}

std::string join_indices(const std::vector<std::size_t>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i] + 1);
  }
  return out;
}

// Calls `visit` with each size-`s` index combination of [0, n) in
// lexicographic order; stops when visit returns true.
template <typename F>
bool for_each_combination(std::size_t n, std::size_t s, F&& visit) {
  std::vector<std::size_t> idx(s);
  for (std::size_t i = 0; i < s; ++i) idx[i] = i;
  while (true) {
    if (visit(idx)) return true;
    std::size_t i = s;
    while (i > 0 && idx[i - 1] == n - s + (i - 1)) --i;
    if (i == 0) return false;
    ++idx[i - 1];
    for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

bool FeatureFormula::holds(const FeatureVector& row) const {
  switch (kind) {
    case Kind::True:
      return true;
    case Kind::False:
      return false;
    case Kind::Dnf:
      break;
  }
  return std::any_of(regions.begin(), regions.end(), [&](const auto& r) {
    return std::all_of(r.begin(), r.end(), [&](std::size_t k) { return row.at(k) == Tri::One; });
  });
}

std::string FeatureFormula::to_string(const std::vector<std::string>& header) const {
  if (kind == Kind::True) return "true";
  if (kind == Kind::False || regions.empty()) return "false";
  std::string out;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (r > 0) out += " | ";
    const bool paren = regions.size() > 1 && regions[r].size() > 1;
    if (paren) out += '(';
    for (std::size_t i = 0; i < regions[r].size(); ++i) {
      if (i > 0) out += " & ";
      auto k = regions[r][i];
      out += k < header.size() ? header[k] : fmt::format("f{}", k + 1);
    }
    if (paren) out += ')';
  }
  return out;
}

std::vector<std::size_t> FeatureFormula::features() const {
  std::set<std::size_t> s;
  for (const auto& r : regions) s.insert(r.begin(), r.end());
  return {s.begin(), s.end()};
}

LabeledMatrix normalize(const LabeledMatrix& m) {
  LabeledMatrix out;
  out.header = m.header;
  for (std::size_t i = 0; i < m.rows.size(); ++i) {
    if (!out.contains(m.rows[i], m.labels[i])) out.add(m.rows[i], m.labels[i]);
  }
  return out;
}

std::vector<std::size_t> count_cuts(const LabeledMatrix& m, const Pairs& pairs) {
  std::vector<std::size_t> cuts(m.columns(), 0);
  for (auto [i, j] : pairs) {
    const auto& p = m.rows[i];
    const auto& n = m.rows[j];
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      if (p[k] == Tri::One && n[k] == Tri::Zero) ++cuts[k];
    }
  }
  return cuts;
}

std::vector<std::size_t> choose(const LabeledMatrix& m) {
  Pairs pairs;
  for (auto i : rows_with(m, Label::Positive)) {
    for (auto j : rows_with(m, Label::Negative)) pairs.emplace_back(i, j);
  }
  std::vector<std::size_t> K;
  while (!pairs.empty()) {
    auto cuts = count_cuts(m, pairs);
    std::size_t best = 0;
    for (std::size_t k = 1; k < cuts.size(); ++k) {
      if (cuts[k] > cuts[best]) best = k;
    }
    if (cuts.empty() || cuts[best] == 0) {
      const auto [i, j] = pairs.front();
      throw InsufficientFeatures(fmt::format(
          "no feature separates positive row {} from negative row {}; add a feature", i + 1, j + 1));
    }
    std::erase_if(pairs, [&](const auto& p) {
      return m.rows[p.first][best] == Tri::One && m.rows[p.second][best] == Tri::Zero;
    });
    K.push_back(best);
  }
  return K;
}

RegionSet combine(const LabeledMatrix& m, const std::vector<std::size_t>& K) {
  const auto pos = rows_with(m, Label::Positive);
  const auto neg = rows_with(m, Label::Negative);
  RegionSet regions;
  std::set<std::size_t> covered;
  if (pos.empty()) return regions;

  const std::size_t limit = std::min(K.size(), kMaxCombination);
  for (std::size_t s = 1; s <= limit; ++s) {
    bool done = for_each_combination(K.size(), s, [&](const std::vector<std::size_t>& idx) {
      std::vector<std::size_t> c;
      for (auto i : idx) c.push_back(K[i]);
      for (auto n : neg) {
        bool excluded = std::any_of(c.begin(), c.end(), [&](std::size_t k) { return m.rows[n][k] == Tri::Zero; });
        if (!excluded) return false;
      }
      std::vector<std::size_t> cover;
      for (auto p : pos) {
        if (std::all_of(c.begin(), c.end(), [&](std::size_t k) { return m.rows[p][k] == Tri::One; })) {
          cover.push_back(p);
        }
      }
      bool novel = std::any_of(cover.begin(), cover.end(), [&](std::size_t p) { return !covered.contains(p); });
      if (!novel) return false;
      std::erase_if(regions, [&](const Region& r) {
        return r.covered.size() < cover.size() && std::includes(cover.begin(), cover.end(), r.covered.begin(), r.covered.end());
      });
      covered.insert(cover.begin(), cover.end());
      regions.push_back({std::move(c), std::move(cover)});
      return covered.size() == pos.size();
    });
    if (done) return regions;
  }
  throw LimitExceeded(fmt::format("region combination needs more than {} of {} selected features", limit, K.size()));
}

FeatureFormula learn(const LabeledMatrix& m) {
  const auto np = m.positives();
  const auto nn = m.negatives();
  if (np == 0) return FeatureFormula::falsity();
  if (nn == 0) return FeatureFormula::truth();
  auto regions = combine(m, choose(m));
  FeatureFormula f;
  f.kind = FeatureFormula::Kind::Dnf;
  for (auto& r : regions) f.regions.push_back(std::move(r.features));
  return f;
}

std::string learn_report(const LabeledMatrix& m, const std::vector<std::size_t>& K, const RegionSet& regions) {
  std::string out = fmt::format("rows: {} ({} positive, {} negative)\n", m.rows.size(), m.positives(), m.negatives());
  out += fmt::format("chosen: [{}]\n", join_indices(K));
  out += "regions:";
  for (const auto& r : regions) out += fmt::format(" {{{}}}", join_indices(r.features));
  out += '\n';
  FeatureFormula f;
  f.kind = FeatureFormula::Kind::Dnf;
  for (const auto& r : regions) f.regions.push_back(r.features);
  out += fmt::format("formula: {}\n", f.to_string(m.header));
  return out;
}

}  // namespace slearner
