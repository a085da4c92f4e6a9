#include "slearner/features.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <sstream>

#include <fmt/format.h>

namespace slearner {

namespace {

std::string join_paths(const std::vector<Path>& paths) {
  std::string out;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (i > 0) out += ',';
    out += paths[i].to_string();
  }
  return out;
}

std::string pred_display(const std::string& pred, const std::vector<Path>& args) {
  return fmt::format("is_{}({})", pred, join_paths(args));
}

std::string shape_display(const Shape& s, const Path& p) {
  if (s.kind == Shape::Kind::PointsTo) return fmt::format("{} |-> {}", p.to_string(), s.name);
  return pred_display(s.name, {p});
}

bool applies_to(const PredicateDef& pred, const Schema& schema, const ValueType& t) {
  return t.is_ref() && (!pred.applies || pred.applies(schema, t.record));
}

// Ordered k-tuples of distinct reference variables whose first element has
// a type the predicate applies to.
void permutations(const std::vector<TypedPath>& refs, std::size_t k, const PredicateDef& pred, const Schema& schema,
                  std::vector<std::vector<Path>>& out) {
  std::vector<std::size_t> pick;
  std::vector<bool> used(refs.size(), false);
  std::function<void()> rec = [&] {
    if (pick.size() == k) {
      std::vector<Path> args;
      for (auto i : pick) args.push_back(refs[i].path);
      out.push_back(std::move(args));
      return;
    }
    for (std::size_t i = 0; i < refs.size(); ++i) {
      if (used[i]) continue;
      if (pick.empty() && !applies_to(pred, schema, refs[i].type)) continue;
      if (!pick.empty() && !refs[i].type.is_ref()) continue;
      used[i] = true;
      pick.push_back(i);
      rec();
      pick.pop_back();
      used[i] = false;
    }
  };
  rec();
}

std::string signed_sum(const std::vector<std::pair<int, std::size_t>>& terms, const std::vector<NumTerm>& all) {
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& name = all[terms[i].second].display;
    if (i == 0) {
      out += terms[i].first < 0 ? "-" + name : name;
    } else {
      out += terms[i].first < 0 ? " - " : " + ";
      out += name;
    }
  }
  return out;
}

std::string num_display(const FeatureDescriptor& f, const std::vector<NumTerm>& all) {
  if (f.terms.size() == 1 && !f.equality && f.terms[0].first < 0) {
    // -u > c  is shown as  u < -c
    return fmt::format("{} < {}", all[f.terms[0].second].display, -f.constant);
  }
  return fmt::format("{} {} {}", signed_sum(f.terms, all), f.equality ? "=" : ">", f.constant);
}

Tri tri(bool b) { return b ? Tri::One : Tri::Zero; }

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          cell += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !cell.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
      }
      row.clear();
      cell.clear();
      any = false;
    } else {
      cell += c;
      any = true;
    }
  }
  if (quoted) throw Error("csv: unterminated quoted cell");
  if (any || !cell.empty()) {
    row.push_back(std::move(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string FeatureCatalog::listing() const {
  std::string out;
  for (std::size_t i = 0; i < features_.size(); ++i) out += fmt::format("{}. {}\n", i + 1, features_[i].display);
  return out;
}

std::vector<std::string> FeatureCatalog::header() const {
  std::vector<std::string> h;
  h.reserve(features_.size());
  for (const auto& f : features_) h.push_back(f.display);
  return h;
}

FeatureCatalog build_catalog(const std::vector<TypedPath>& refs, const std::vector<TypedPath>& nums,
                             std::span<const PredicateDef* const> preds, std::vector<std::int64_t> consts,
                             const Schema& schema) {
  using K = FeatureDescriptor::Kind;
  std::vector<FeatureDescriptor> fs;

  for (const auto& r : refs) {
    FeatureDescriptor f;
    f.kind = K::IsNull;
    f.paths = {r.path};
    f.display = fmt::format("{} = null", r.path.to_string());
    fs.push_back(std::move(f));
  }
  for (const auto& r : refs) {
    FeatureDescriptor f;
    f.kind = K::NonNull;
    f.paths = {r.path};
    f.name = r.type.record;
    f.display = fmt::format("{} != null", r.path.to_string());
    fs.push_back(std::move(f));
  }
  for (std::size_t i = 0; i < refs.size(); ++i) {
    for (std::size_t j = i + 1; j < refs.size(); ++j) {
      for (K k : {K::Eq, K::Neq}) {
        FeatureDescriptor f;
        f.kind = k;
        f.paths = {refs[i].path, refs[j].path};
        f.display =
            fmt::format("{} {} {}", refs[i].path.to_string(), k == K::Eq ? "=" : "!=", refs[j].path.to_string());
        fs.push_back(std::move(f));
      }
    }
  }

  std::vector<NumTerm> terms;
  for (const auto* pred : preds) {
    std::vector<std::vector<Path>> apps;
    permutations(refs, pred->ref_arity, *pred, schema, apps);
    for (auto& args : apps) {
      FeatureDescriptor f;
      f.kind = K::PredSat;
      f.paths = args;
      f.name = pred->name;
      f.display = pred_display(pred->name, args);
      fs.push_back(std::move(f));
      for (std::size_t p = 0; p < pred->numeric_params.size(); ++p) {
        NumTerm t;
        t.kind = NumTerm::Kind::PredParam;
        t.paths = args;
        t.pred = pred->name;
        t.param = p;
        t.display = fmt::format("{}_{}({})", pred->numeric_params[p], pred->name, join_paths(args));
        terms.push_back(std::move(t));
      }
    }
  }

  auto shapes_of = [&](const TypedPath& r) {
    std::vector<Shape> out{{Shape::Kind::PointsTo, r.type.record}};
    for (const auto* pred : preds) {
      if (pred->ref_arity == 1 && applies_to(*pred, schema, r.type)) out.push_back({Shape::Kind::Pred, pred->name});
    }
    return out;
  };
  for (std::size_t i = 0; i < refs.size(); ++i) {
    for (std::size_t j = i + 1; j < refs.size(); ++j) {
      auto si = shapes_of(refs[i]);
      auto sj = shapes_of(refs[j]);
      for (const auto& a : si) {
        for (const auto& b : sj) {
          FeatureDescriptor f;
          f.kind = K::SepCombo;
          f.paths = {refs[i].path, refs[j].path};
          f.shapes = {a, b};
          f.display = fmt::format("{} & {} & sep({},{})", shape_display(a, refs[i].path),
                                  shape_display(b, refs[j].path), refs[i].path.to_string(),
                                  refs[j].path.to_string());
          fs.push_back(std::move(f));
        }
      }
    }
  }

  for (const auto& n : nums) {
    NumTerm t;
    t.kind = NumTerm::Kind::Var;
    t.paths = {n.path};
    t.display = n.path.to_string();
    terms.push_back(std::move(t));
  }

  consts.push_back(0);
  std::sort(consts.begin(), consts.end());
  consts.erase(std::unique(consts.begin(), consts.end()), consts.end());

  auto add_num = [&](std::vector<std::pair<int, std::size_t>> ts, bool eq, std::int64_t c) {
    FeatureDescriptor f;
    f.kind = K::NumAtom;
    f.terms = std::move(ts);
    f.equality = eq;
    f.constant = c;
    f.display = num_display(f, terms);
    fs.push_back(std::move(f));
  };
  for (auto c : consts) {
    for (int s : {1, -1}) {
      for (std::size_t u = 0; u < terms.size(); ++u) add_num({{s, u}}, false, c);
    }
  }
  for (auto c : consts) {
    for (std::size_t u = 0; u < terms.size(); ++u) add_num({{1, u}}, true, c);
  }
  static constexpr std::pair<int, int> kSigns[] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  for (bool eq : {false, true}) {
    for (auto c : consts) {
      for (std::size_t u = 0; u < terms.size(); ++u) {
        for (std::size_t v = u + 1; v < terms.size(); ++v) {
          for (auto [a, b] : kSigns) add_num({{a, u}, {b, v}}, eq, c);
        }
      }
    }
  }

  return FeatureCatalog(refs, nums, std::move(terms), std::move(fs));
}

FeatureVector evaluate(const FeatureCatalog& catalog, const MemoryGraph& g, const PredicateRegistry& preds) {
  using K = FeatureDescriptor::Kind;
  std::map<Path, std::optional<NodeId>> resolved;
  auto node = [&](const Path& p) -> std::optional<NodeId> {
    auto it = resolved.find(p);
    if (it == resolved.end()) it = resolved.emplace(p, resolve(g, p)).first;
    return it->second;
  };

  // Predicate applications: nullopt = some argument unresolvable.
  std::map<std::pair<std::string, std::vector<Path>>, std::optional<std::optional<PredicateMatch>>> apps;
  auto apply = [&](const std::string& name, const std::vector<Path>& args) -> const std::optional<std::optional<PredicateMatch>>& {
    auto key = std::make_pair(name, args);
    auto it = apps.find(key);
    if (it != apps.end()) return it->second;
    std::optional<std::optional<PredicateMatch>> result;
    std::vector<NodeId> nodes;
    bool ok = true;
    for (const auto& a : args) {
      auto n = node(a);
      if (!n) {
        ok = false;
        break;
      }
      nodes.push_back(*n);
    }
    if (ok) {
      const auto* def = preds.find(name);
      if (def == nullptr) throw Error(fmt::format("unknown predicate '{}'", name));
      result = eval(*def, g, nodes);
    }
    return apps.emplace(std::move(key), std::move(result)).first->second;
  };

  std::vector<std::optional<std::int64_t>> term_values;
  term_values.reserve(catalog.terms().size());
  for (const auto& t : catalog.terms()) {
    std::optional<std::int64_t> v;
    if (t.kind == NumTerm::Kind::Var) {
      auto n = node(t.paths[0]);
      if (n && g.is_value(*n)) v = g.value(*n);
    } else {
      const auto& m = apply(t.pred, t.paths);
      if (m && *m) v = (**m).numerics.at(t.param);
    }
    term_values.push_back(v);
  }

  auto shape_holds = [&](const Shape& s, const Path& p) -> Tri {
    auto n = node(p);
    if (!n) return Tri::NA;
    if (s.kind == Shape::Kind::PointsTo) return tri(g.is_record(*n) && g.type(*n) == s.name);
    const auto& m = apply(s.name, {p});
    if (!m) return Tri::NA;
    return tri(m->has_value());
  };

  FeatureVector out;
  out.reserve(catalog.size());
  for (const auto& f : catalog.features()) {
    switch (f.kind) {
      case K::IsNull:
      case K::NonNull: {
        auto n = node(f.paths[0]);
        if (!n) {
          out.push_back(Tri::NA);
        } else {
          bool is_null = *n == kNullNode;
          out.push_back(tri(f.kind == K::IsNull ? is_null : !is_null));
        }
        break;
      }
      case K::Eq:
      case K::Neq: {
        auto a = node(f.paths[0]);
        auto b = node(f.paths[1]);
        if (!a || !b) {
          out.push_back(Tri::NA);
        } else {
          out.push_back(tri((*a == *b) == (f.kind == K::Eq)));
        }
        break;
      }
      case K::PredSat: {
        const auto& m = apply(f.name, f.paths);
        out.push_back(m ? tri(m->has_value()) : Tri::NA);
        break;
      }
      case K::SepCombo: {
        Tri a = shape_holds(f.shapes[0], f.paths[0]);
        Tri b = shape_holds(f.shapes[1], f.paths[1]);
        if (a == Tri::NA || b == Tri::NA) {
          out.push_back(Tri::NA);
        } else if (a == Tri::Zero || b == Tri::Zero) {
          out.push_back(Tri::Zero);
        } else {
          out.push_back(separated(g, f.paths[0], f.paths[1]));
        }
        break;
      }
      case K::NumAtom: {
        std::int64_t sum = 0;
        bool na = false;
        for (auto [sign, t] : f.terms) {
          if (!term_values[t]) {
            na = true;
            break;
          }
          sum += sign * *term_values[t];
        }
        if (na) {
          out.push_back(Tri::NA);
        } else {
          out.push_back(tri(f.equality ? sum == f.constant : sum > f.constant));
        }
        break;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t LabeledMatrix::positives() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), Label::Positive));
}

std::size_t LabeledMatrix::negatives() const { return labels.size() - positives(); }

void LabeledMatrix::add(FeatureVector row, Label label) {
  if (!header.empty() && row.size() != header.size()) {
    throw Error(fmt::format("row has {} cells, expected {}", row.size(), header.size()));
  }
  rows.push_back(std::move(row));
  labels.push_back(label);
}

bool LabeledMatrix::contains(const FeatureVector& row, Label label) const {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (labels[i] == label && rows[i] == row) return true;
  }
  return false;
}

std::string LabeledMatrix::to_csv() const {
  std::ostringstream out;
  for (const auto& h : header) out << csv_cell(h) << ',';
  out << "label\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Tri t : rows[i]) out << tri_char(t) << ',';
    out << label_name(labels[i]) << '\n';
  }
  return out.str();
}

LabeledMatrix LabeledMatrix::from_csv(std::string_view csv) {
  auto table = parse_csv(csv);
  if (table.empty() || table[0].empty() || table[0].back() != "label") {
    throw Error("csv: header must end with 'label'");
  }
  LabeledMatrix m;
  m.header.assign(table[0].begin(), table[0].end() - 1);
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& cells = table[r];
    if (cells.size() != m.header.size() + 1) throw Error(fmt::format("csv: row {} has {} cells", r, cells.size()));
    FeatureVector row;
    for (std::size_t c = 0; c + 1 < cells.size(); ++c) {
      if (cells[c].size() != 1) throw Error(fmt::format("csv: bad cell '{}'", cells[c]));
      row.push_back(tri_from_char(cells[c][0]));
    }
    Label l;
    if (cells.back() == label_name(Label::Positive)) {
      l = Label::Positive;
    } else if (cells.back() == label_name(Label::Negative)) {
      l = Label::Negative;
    } else {
      throw Error(fmt::format("csv: bad label '{}'", cells.back()));
    }
    m.add(std::move(row), l);
  }
  return m;
}

}  // namespace slearner
