#include "slearner/mutation.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

namespace slearner {

namespace {

struct EdgeRef {
  NodeId src = kInitNode;
  std::string label;
};

EdgeRef edge_of(const MemoryGraph& g, const Path& p) {
  if (p.is_variable()) return {kInitNode, p.root()};
  auto parent = resolve(g, p.parent());
  if (!parent || !g.is_record(*parent)) throw Error(fmt::format("mutation target '{}' does not resolve", p.to_string()));
  return {*parent, p.labels().back()};
}

NodeId current(const MemoryGraph& g, const EdgeRef& e) {
  auto t = g.target(e.src, e.label);
  if (!t) throw Error(fmt::format("no edge '{}' to mutate", e.label));
  return *t;
}

std::int64_t value_at(const MemoryGraph& g, NodeId n) {
  auto v = g.value(n);
  if (!v) throw Error("numeric mutation on a non-value node");
  return *v;
}

void add_unique(std::vector<TypedPath>& out, TypedPath p) {
  if (std::find_if(out.begin(), out.end(), [&](const TypedPath& q) { return q.path == p.path; }) == out.end()) {
    out.push_back(std::move(p));
  }
}

}  // namespace

std::string Mutation::to_string() const {
  switch (kind) {
    case Kind::FreshObject: return fmt::format("FreshObject({}: {})", target.to_string(), type);
    case Kind::Repoint:
      return node == kNullNode ? fmt::format("Repoint({} -> null)", target.to_string())
                               : fmt::format("Repoint({} -> n{})", target.to_string(), node);
    case Kind::SwapRef: return fmt::format("SwapRef({}, {})", target.to_string(), other.to_string());
    case Kind::SetConst: return fmt::format("SetConst({} := {})", target.to_string(), value);
    case Kind::Offset: return fmt::format("Offset({} {:+})", target.to_string(), value);
    case Kind::SwapNum: return fmt::format("SwapNum({}, {})", target.to_string(), other.to_string());
  }
  return "?";
}

std::vector<TypedPath> mutation_targets(const FeatureFormula& formula, const FeatureCatalog& catalog,
                                        const MemoryGraph& g, const std::vector<TypedPath>& vars,
                                        const Schema& schema) {
  std::vector<TypedPath> out;
  if (formula.kind != FeatureFormula::Kind::Dnf) {
    for (const auto& v : vars) add_unique(out, v);
  } else {
    std::set<Path> mentioned;
    for (auto k : formula.features()) {
      const auto& f = catalog[k];
      mentioned.insert(f.paths.begin(), f.paths.end());
      for (auto [sign, t] : f.terms) {
        const auto& ps = catalog.terms()[t].paths;
        mentioned.insert(ps.begin(), ps.end());
      }
    }
    for (const auto& v : vars) {
      if (mentioned.contains(v.path)) add_unique(out, v);
    }
  }
  const std::size_t primary = out.size();
  for (std::size_t i = 0; i < primary; ++i) {
    const auto p = out[i];
    if (!p.type.is_ref()) continue;
    auto n = resolve(g, p.path);
    if (!n || !g.is_record(*n)) continue;
    const auto* rec = schema.find(g.type(*n));
    if (rec == nullptr) continue;
    for (const auto& f : rec->fields) add_unique(out, {p.path.extend(f.name), f.type});
  }
  return out;
}

std::vector<Mutation> plan(const std::vector<TypedPath>& targets, const MemoryGraph& g,
                           const std::vector<std::int64_t>& consts, const Schema& schema) {
  std::vector<Mutation> out;
  std::vector<std::int64_t> cs = consts;
  cs.push_back(0);
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());

  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto& t = targets[i];
    // Only targets whose edge exists in this graph can be mutated.
    std::optional<NodeId> cur;
    try {
      cur = current(g, edge_of(g, t.path));
    } catch (const Error&) {
      continue;
    }
    if (t.type.is_ref()) {
      if (schema.find(t.type.record) == nullptr) continue;
      Mutation m;
      m.target = t.path;
      m.type = t.type.record;
      m.kind = Mutation::Kind::FreshObject;
      out.push_back(m);
      m.kind = Mutation::Kind::Repoint;
      m.node = kNullNode;
      out.push_back(m);
      for (NodeId n = 0; n < g.node_count(); ++n) {
        if (g.is_record(n) && g.type(n) == t.type.record) {
          m.node = n;
          out.push_back(m);
        }
      }
      for (std::size_t j = i + 1; j < targets.size(); ++j) {
        if (targets[j].type != t.type) continue;
        Mutation s;
        s.kind = Mutation::Kind::SwapRef;
        s.target = t.path;
        s.other = targets[j].path;
        s.type = t.type.record;
        out.push_back(s);
      }
    } else {
      Mutation m;
      m.target = t.path;
      m.kind = Mutation::Kind::SetConst;
      if (t.type.kind == ScalarKind::Bool) {
        for (std::int64_t v : {0, 1}) {
          m.value = v;
          out.push_back(m);
        }
      } else {
        for (auto c : cs) {
          m.value = c;
          out.push_back(m);
        }
        m.kind = Mutation::Kind::Offset;
        for (std::int64_t d : {1, -1}) {
          m.value = d;
          out.push_back(m);
        }
      }
      for (std::size_t j = i + 1; j < targets.size(); ++j) {
        if (targets[j].type != t.type) continue;
        Mutation s;
        s.kind = Mutation::Kind::SwapNum;
        s.target = t.path;
        s.other = targets[j].path;
        out.push_back(s);
      }
    }
  }
  return out;
}

std::vector<Mutation> plan(const FeatureFormula& formula, const FeatureCatalog& catalog, const MemoryGraph& g,
                           const std::vector<TypedPath>& vars, const std::vector<std::int64_t>& consts,
                           const Schema& schema) {
  return plan(mutation_targets(formula, catalog, g, vars, schema), g, consts, schema);
}

MemoryGraph apply(const MemoryGraph& in, const Mutation& m, const Schema& schema) {
  MemoryGraph g = in;
  const EdgeRef e = edge_of(g, m.target);
  const NodeId cur = current(g, e);
  switch (m.kind) {
    case Mutation::Kind::FreshObject: {
      const auto* rec = schema.find(m.type);
      if (rec == nullptr) throw Error(fmt::format("unknown record type '{}'", m.type));
      NodeId n = g.add_record(m.type);
      for (const auto& f : rec->fields) {
        g.set_edge(n, f.name, f.type.is_ref() ? kNullNode : g.add_value(f.type.to_string(), 0));
      }
      g.set_edge(e.src, e.label, n);
      break;
    }
    case Mutation::Kind::Repoint: {
      if (m.node != kNullNode) {
        if (m.node >= g.node_count() || !g.is_record(m.node) || (!m.type.empty() && g.type(m.node) != m.type)) {
          throw Error(fmt::format("cannot repoint '{}' to node {}", m.target.to_string(), m.node));
        }
      }
      if (cur != kNullNode && !g.is_record(cur)) throw Error("repoint of a numeric target");
      g.set_edge(e.src, e.label, m.node);
      break;
    }
    case Mutation::Kind::SwapRef:
    case Mutation::Kind::SwapNum: {
      const EdgeRef o = edge_of(g, m.other);
      const NodeId oc = current(g, o);
      if (m.kind == Mutation::Kind::SwapRef) {
        g.set_edge(e.src, e.label, oc);
        g.set_edge(o.src, o.label, cur);
      } else {
        auto a = value_at(g, cur);
        auto b = value_at(g, oc);
        g.set_edge(e.src, e.label, g.add_value(g.type(cur), b));
        g.set_edge(o.src, o.label, g.add_value(g.type(oc), a));
      }
      break;
    }
    case Mutation::Kind::SetConst:
      value_at(g, cur);
      g.set_edge(e.src, e.label, g.add_value(g.type(cur), m.value));
      break;
    case Mutation::Kind::Offset:
      g.set_edge(e.src, e.label, g.add_value(g.type(cur), value_at(g, cur) + m.value));
      break;
  }
  return g;
}

RefineResult refine(const PointContext& point, LabeledMatrix matrix, const MutationConfig& cfg) {
  const Schema& schema = point.interp->program().schema;
  RefineResult r;
  r.matrix = normalize(matrix);
  r.formula = learn(r.matrix);
  r.growth.push_back(r.matrix.rows.size());

  std::unordered_set<std::string> seen;
  for (const auto& s : point.snapshots) seen.insert(s.encode());

  for (std::size_t round = 1; round <= cfg.rounds; ++round) {
    r.rounds = round;
    struct Candidate {
      bool primary;
      std::size_t snapshot;
      Mutation m;
    };
    std::vector<Candidate> cands;
    for (std::size_t s = 0; s < point.snapshots.size(); ++s) {
      const auto& g = point.snapshots[s];
      auto targets = mutation_targets(r.formula, *point.catalog, g, point.vars, schema);
      std::set<Path> primary;
      for (const auto& t : targets) {
        if (std::any_of(point.vars.begin(), point.vars.end(), [&](const TypedPath& v) { return v.path == t.path; }))
          primary.insert(t.path);
      }
      for (auto& m : plan(targets, g, point.consts, schema)) {
        bool p = primary.contains(m.target);
        cands.push_back({p, s, std::move(m)});
      }
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Candidate& a, const Candidate& b) { return a.primary && !b.primary; });

    std::vector<MemoryGraph> states;
    std::vector<const Candidate*> used;
    for (const auto& c : cands) {
      if (states.size() >= cfg.mutants_per_round) break;
      MemoryGraph mg = apply(point.snapshots[c.snapshot], c.m, schema);
      if (!seen.insert(mg.encode()).second) continue;
      states.push_back(std::move(mg));
      used.push_back(&c);
    }

    auto outcomes = resume_all(*point.interp, point.gap, states, cfg.run, cfg.policy);
    auto rows = evaluate_rows(*point.catalog, states, cfg.policy);
    std::size_t added = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      const Label l = outcomes[i].label();
      const bool fresh = !r.matrix.contains(rows[i], l);
      if (fresh) {
        r.matrix.add(rows[i], l);
        ++added;
      }
      r.log.push_back(fmt::format("{}: {} -> {}{}", used[i]->snapshot, used[i]->m.to_string(),
                                  outcome_name(outcomes[i].kind), fresh ? " [new]" : ""));
    }
    r.growth.push_back(r.matrix.rows.size());
    if (added == 0) break;
    auto next = learn(r.matrix);
    const bool same = next == r.formula;
    r.formula = std::move(next);
    if (same) break;
    if (round == cfg.rounds) r.budget_hit = true;
  }
  return r;
}

}  // namespace slearner
