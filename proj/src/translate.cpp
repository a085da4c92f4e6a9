#include "slearner/translate.hpp"

#include <algorithm>
#include <map>
#include <optional>

#include <fmt/format.h>

namespace slearner {

namespace {

struct PredShape {
  std::string pred;
  std::vector<Path> args;
  /// Existential per numeric parameter; empty = not referenced.
  std::vector<std::string> numerics;
};

class RegionBuilder {
 public:
  RegionBuilder(const FeatureCatalog& catalog, const Schema& schema, const std::set<std::string>& reserved)
      : catalog_(catalog), schema_(schema), reserved_(reserved) {}

  SymbolicHeap build(const std::vector<std::size_t>& features) {
    using K = FeatureDescriptor::Kind;
    // Shapes first, so existential names follow shape order.
    for (auto k : features) {
      const auto& f = catalog_[k];
      switch (f.kind) {
        case K::NonNull:
          add_points_to(f.paths[0], f.name);
          break;
        case K::PredSat:
          add_pred(f.name, f.paths);
          break;
        case K::SepCombo:
          for (std::size_t i = 0; i < 2; ++i) {
            if (f.shapes[i].kind == Shape::Kind::PointsTo) {
              add_points_to(f.paths[i], f.shapes[i].name);
            } else {
              add_pred(f.shapes[i].name, {f.paths[i]});
            }
          }
          break;
        case K::NumAtom:
          for (auto [sign, t] : f.terms) {
            const auto& term = catalog_.terms()[t];
            if (term.kind == NumTerm::Kind::PredParam) term_name(t);
          }
          break;
        default:
          break;
      }
    }
    for (auto k : features) {
      const auto& f = catalog_[k];
      switch (f.kind) {
        case K::IsNull:
          pure_.push_back(PureAtom::null_test(f.paths[0].to_string(), true));
          break;
        case K::Eq:
        case K::Neq: {
          LinearExpr e;
          e.coeffs[f.paths[0].to_string()] += 1;
          e.coeffs[f.paths[1].to_string()] -= 1;
          pure_.push_back(PureAtom::linear(e, f.kind == K::Eq ? Cmp::Eq : Cmp::Ne));
          break;
        }
        case K::NumAtom: {
          LinearExpr e;
          for (auto [sign, t] : f.terms) {
            auto name = term_name(t);
            if (f.equality) {
              e.coeffs[name] += sign;
            } else {
              e.coeffs[name] -= sign;
            }
          }
          e.constant = f.equality ? -f.constant : f.constant;
          std::erase_if(e.coeffs, [](const auto& kv) { return kv.second == 0; });
          pure_.push_back(PureAtom::linear(e, f.equality ? Cmp::Eq : Cmp::Lt));
          break;
        }
        default:
          break;
      }
    }

    SymbolicHeap h;
    bool spatial = false;
    std::vector<SpatialAtom> atoms;
    for (const auto& root : order_) {
      auto p = preds_.find(root);
      if (p != preds_.end()) {
        spatial = true;
        std::vector<Arg> args;
        for (const auto& a : p->second.args) args.push_back(Arg::var(a.to_string()));
        for (const auto& n : p->second.numerics) {
          if (n.empty()) {
            args.push_back(Arg::wildcard());
          } else {
            args.push_back(Arg::var(n));
            h.exists.push_back(n);
          }
        }
        atoms.push_back(SpatialAtom::pred(p->second.pred, std::move(args)));
        if (points_to_.contains(root)) pure_.push_back(PureAtom::null_test(root, false));
      } else if (auto t = points_to_.find(root); t != points_to_.end()) {
        spatial = true;
        const auto* rec = schema_.find(t->second);
        if (rec == nullptr) throw Error(fmt::format("unknown record type '{}'", t->second));
        atoms.push_back(
            SpatialAtom::points_to(root, t->second, std::vector<Arg>(rec->fields.size(), Arg::wildcard())));
      }
    }
    if (spatial) h.spatial = std::move(atoms);
    h.pure = std::move(pure_);
    return h;
  }

 private:
  void touch(const std::string& root) {
    if (std::find(order_.begin(), order_.end(), root) == order_.end()) order_.push_back(root);
  }

  void add_points_to(const Path& p, const std::string& type) {
    auto root = p.to_string();
    touch(root);
    points_to_.emplace(root, type);
  }

  PredShape& add_pred(const std::string& pred, const std::vector<Path>& args) {
    auto root = args[0].to_string();
    touch(root);
    auto it = preds_.find(root);
    if (it != preds_.end()) {
      if (it->second.pred != pred || it->second.args != args) {
        throw Error(fmt::format("region asks for both {} and {} on '{}'", it->second.pred, pred, root));
      }
      return it->second;
    }
    const auto* def = PredicateRegistry::builtin().find(pred);
    std::size_t nums = 0;
    for (const auto& t : catalog_.terms()) {
      if (t.kind == NumTerm::Kind::PredParam && t.pred == pred) nums = std::max(nums, t.param + 1);
    }
    if (def != nullptr) nums = def->numeric_params.size();
    PredShape s{pred, args, std::vector<std::string>(nums)};
    return preds_.emplace(root, std::move(s)).first->second;
  }

  std::string fresh() {
    while (true) {
      std::string name;
      std::size_t n = next_++;
      do {
        name.insert(name.begin(), static_cast<char>('a' + n % 26));
        n /= 26;
      } while (n-- > 0);
      if (!reserved_.contains(name) && name != "res" && !used_names().contains(name)) return name;
    }
  }

  std::set<std::string> used_names() const {
    std::set<std::string> s;
    for (const auto& r : catalog_.ref_vars()) s.insert(r.path.root());
    for (const auto& r : catalog_.num_vars()) s.insert(r.path.root());
    return s;
  }

  std::string term_name(std::size_t t) {
    const auto& term = catalog_.terms()[t];
    if (term.kind == NumTerm::Kind::Var) return term.paths[0].to_string();
    auto& shape = add_pred(term.pred, term.paths);
    auto& slot = shape.numerics.at(term.param);
    if (slot.empty()) slot = fresh();
    return slot;
  }

  const FeatureCatalog& catalog_;
  const Schema& schema_;
  const std::set<std::string>& reserved_;
  std::vector<std::string> order_;
  std::map<std::string, std::string> points_to_;
  std::map<std::string, PredShape> preds_;
  std::vector<PureAtom> pure_;
  std::size_t next_ = 0;
};

}  // namespace

Formula translate(const FeatureFormula& dnf, const FeatureCatalog& catalog, const Schema& schema,
                  const std::set<std::string>& reserved) {
  if (dnf.is_true()) return Formula::truth();
  if (dnf.is_false() || dnf.regions.empty()) return Formula::falsity();
  Formula f;
  for (const auto& region : dnf.regions) {
    RegionBuilder b(catalog, schema, reserved);
    f.disjuncts.push_back(b.build(region));
  }
  return f;
}

}  // namespace slearner
