#include "slearner/memgraph.hpp"

#include <algorithm>
#include <deque>
#include <fmt/format.h>
#include <sstream>

namespace slearner {

// ---------------------------------------------------------------------------
// Path

Path::Path(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) throw Error("empty path");
  for (const auto& l : labels_)
    if (l.empty()) throw Error("empty path label");
}

Path Path::parse(std::string_view dotted) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto dot = dotted.find('.', start);
    parts.emplace_back(dotted.substr(start, dot == std::string_view::npos ? dotted.npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  return Path(std::move(parts));
}

Path Path::extend(std::string label) const {
  auto l = labels_;
  l.push_back(std::move(label));
  return Path(std::move(l));
}

Path Path::parent() const {
  if (labels_.size() < 2) throw Error("variable path has no parent");
  return Path(std::vector<std::string>(labels_.begin(), labels_.end() - 1));
}

std::string Path::to_string() const {
  std::string s = labels_.front();
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    s += '.';
    s += labels_[i];
  }
  return s;
}

// ---------------------------------------------------------------------------
// MemoryGraph

MemoryGraph::MemoryGraph() {
  nodes_.push_back({NodeKind::Init, "init", 0, {}});
  nodes_.push_back({NodeKind::Null, "null", 0, {}});
}

NodeId MemoryGraph::add_record(std::string type) {
  nodes_.push_back({NodeKind::Record, std::move(type), 0, {}});
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId MemoryGraph::add_value(std::string type, std::int64_t value) {
  nodes_.push_back({NodeKind::Value, std::move(type), value, {}});
  return static_cast<NodeId>(nodes_.size() - 1);
}

void MemoryGraph::set_edge(NodeId src, std::string label, NodeId dst) {
  if (src >= nodes_.size() || dst >= nodes_.size()) throw Error("edge endpoint out of range");
  if (src == kNullNode) throw Error("null has no out-edges");
  auto& out = nodes_[src].out;
  auto it = std::lower_bound(out.begin(), out.end(), label,
                             [](const Edge& e, const std::string& l) { return e.label < l; });
  if (it != out.end() && it->label == label) {
    it->target = dst;
  } else {
    out.insert(it, Edge{std::move(label), dst});
  }
}

void MemoryGraph::remove_edge(NodeId src, std::string_view label) {
  auto& out = nodes_[src].out;
  std::erase_if(out, [&](const Edge& e) { return e.label == label; });
}

std::optional<NodeId> MemoryGraph::target(NodeId src, std::string_view label) const {
  const auto& out = nodes_[src].out;
  auto it = std::lower_bound(out.begin(), out.end(), label,
                             [](const Edge& e, std::string_view l) { return e.label < l; });
  if (it != out.end() && it->label == label) return it->target;
  return std::nullopt;
}

std::optional<std::int64_t> MemoryGraph::value(NodeId n) const {
  if (nodes_[n].kind != NodeKind::Value) return std::nullopt;
  return nodes_[n].value;
}

std::vector<std::string> MemoryGraph::variables() const {
  std::vector<std::string> v;
  for (const auto& e : nodes_[kInitNode].out) v.push_back(e.label);
  return v;
}

std::vector<NodeId> MemoryGraph::reach(NodeId from) const {
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeId> stack;
  if (from != kNullNode) stack.push_back(from);
  std::vector<NodeId> out;
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    if (seen[n]) continue;
    seen[n] = 1;
    out.push_back(n);
    for (const auto& e : nodes_[n].out)
      if (e.target != kNullNode && !seen[e.target]) stack.push_back(e.target);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<NodeId> MemoryGraph::reachable_from_variables() const {
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<NodeId> out;
  for (const auto& root : nodes_[kInitNode].out) {
    for (NodeId n : reach(root.target)) {
      if (!seen[n]) {
        seen[n] = 1;
        out.push_back(n);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// BFS order from init over the given root edges (all init edges when
// `roots` is empty).
std::vector<NodeId> bfs_order(const MemoryGraph& g, const std::vector<std::string>* roots) {
  std::vector<NodeId> order{kInitNode, kNullNode};
  std::vector<char> seen(g.node_count(), 0);
  seen[kInitNode] = seen[kNullNode] = 1;
  std::deque<NodeId> queue;
  for (const auto& e : g.edges(kInitNode)) {
    if (roots && std::find(roots->begin(), roots->end(), e.label) == roots->end()) continue;
    if (!seen[e.target]) {
      seen[e.target] = 1;
      order.push_back(e.target);
      queue.push_back(e.target);
    }
  }
  while (!queue.empty()) {
    NodeId n = queue.front();
    queue.pop_front();
    for (const auto& e : g.edges(n)) {
      if (!seen[e.target]) {
        seen[e.target] = 1;
        order.push_back(e.target);
        queue.push_back(e.target);
      }
    }
  }
  return order;
}

MemoryGraph rebuild(const MemoryGraph& g, const std::vector<NodeId>& order,
                    const std::vector<std::string>* roots) {
  std::vector<NodeId> remap(g.node_count(), static_cast<NodeId>(-1));
  MemoryGraph out;
  remap[kInitNode] = kInitNode;
  remap[kNullNode] = kNullNode;
  for (std::size_t i = 2; i < order.size(); ++i) {
    NodeId old = order[i];
    remap[old] = g.is_value(old) ? out.add_value(g.type(old), *g.value(old)) : out.add_record(g.type(old));
  }
  for (NodeId old : order) {
    if (old == kNullNode) continue;
    for (const auto& e : g.edges(old)) {
      if (old == kInitNode && roots &&
          std::find(roots->begin(), roots->end(), e.label) == roots->end())
        continue;
      out.set_edge(remap[old], e.label, remap[e.target]);
    }
  }
  return out;
}

}  // namespace

MemoryGraph MemoryGraph::canonical() const { return rebuild(*this, bfs_order(*this, nullptr), nullptr); }

MemoryGraph MemoryGraph::project(std::span<const std::string> vars) const {
  std::vector<std::string> roots(vars.begin(), vars.end());
  return rebuild(*this, bfs_order(*this, &roots), &roots);
}

std::string MemoryGraph::encode() const {
  const MemoryGraph c = canonical();
  std::string s;
  for (NodeId n = 0; n < c.node_count(); ++n) {
    s += c.type(n);
    if (c.is_value(n)) {
      s += '=';
      s += std::to_string(*c.value(n));
    }
    s += '{';
    for (const auto& e : c.edges(n)) {
      s += e.label;
      s += ':';
      s += std::to_string(e.target);
      s += ',';
    }
    s += '}';
  }
  return s;
}

std::string MemoryGraph::dump() const {
  const MemoryGraph c = canonical();
  std::ostringstream os;
  for (NodeId n = 0; n < c.node_count(); ++n) {
    os << "type(" << n << ")=" << c.type(n) << '\n';
    if (c.is_value(n)) os << "val(" << n << ")=" << *c.value(n) << '\n';
    for (const auto& e : c.edges(n)) os << n << " -" << e.label << "-> " << e.target << '\n';
  }
  return os.str();
}

void MemoryGraph::validate() const {
  if (nodes_.size() < 2 || nodes_[kInitNode].kind != NodeKind::Init || nodes_[kNullNode].kind != NodeKind::Null)
    throw Error("graph lacks init/null nodes");
  if (!nodes_[kNullNode].out.empty()) throw Error("null has out-edges");
  for (NodeId n = 0; n < nodes_.size(); ++n) {
    const auto& d = nodes_[n];
    if (n >= 2 && (d.kind == NodeKind::Init || d.kind == NodeKind::Null))
      throw Error("duplicate init/null node");
    if (d.kind == NodeKind::Value && !d.out.empty()) throw Error("value node with out-edges");
    for (std::size_t i = 0; i < d.out.size(); ++i) {
      if (d.out[i].target >= nodes_.size()) throw Error("edge target outside M");
      if (d.out[i].target == kInitNode) throw Error("edge into init");
      if (i > 0 && !(d.out[i - 1].label < d.out[i].label)) throw Error("duplicate out-edge label");
    }
  }
}

MemoryGraph MemoryGraph::permuted(std::span<const NodeId> perm) const {
  if (perm.size() != nodes_.size() || perm[kInitNode] != kInitNode || perm[kNullNode] != kNullNode)
    throw Error("invalid permutation");
  MemoryGraph out;
  out.nodes_.resize(nodes_.size());
  for (NodeId n = 0; n < nodes_.size(); ++n) {
    auto d = nodes_[n];
    for (auto& e : d.out) e.target = perm[e.target];
    out.nodes_[perm[n]] = std::move(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Queries

std::optional<NodeId> resolve(const MemoryGraph& g, const Path& path) {
  NodeId cur = kInitNode;
  for (const auto& label : path.labels()) {
    if (cur == kNullNode) return std::nullopt;
    auto next = g.target(cur, label);
    if (!next) return std::nullopt;
    cur = *next;
  }
  return cur;
}

std::vector<Path> variables_within_bound(const MemoryGraph& g, std::size_t k) {
  std::vector<Path> out;
  if (k == 0) return out;
  std::vector<std::pair<Path, NodeId>> frontier;
  for (const auto& e : g.edges(kInitNode)) frontier.emplace_back(Path(e.label), e.target);
  for (std::size_t depth = 1; depth <= k && !frontier.empty(); ++depth) {
    std::vector<std::pair<Path, NodeId>> next;
    for (auto& [p, n] : frontier) {
      out.push_back(p);
      if (depth == k || n == kNullNode) continue;
      for (const auto& e : g.edges(n)) next.emplace_back(p.extend(e.label), e.target);
    }
    frontier = std::move(next);
  }
  return out;
}

Tri separated(const MemoryGraph& g, const Path& a, const Path& b) {
  auto na = resolve(g, a);
  auto nb = resolve(g, b);
  if (!na || !nb) return Tri::NA;
  auto ra = g.reach(*na);
  auto rb = g.reach(*nb);
  std::vector<NodeId> common;
  std::set_intersection(ra.begin(), ra.end(), rb.begin(), rb.end(), std::back_inserter(common));
  return common.empty() ? Tri::One : Tri::Zero;
}

// ---------------------------------------------------------------------------
// Enumeration

namespace {

struct Slot {
  int owner;  // -1 for init, else record index
  std::string label;
  ValueType type;
};

class Enumerator {
 public:
  Enumerator(const GraphSpace& space, std::size_t target,
             const std::function<bool(const MemoryGraph&)>& visit)
      : space_(space), target_(target), visit_(visit) {
    auto vars = space.vars;
    std::sort(vars.begin(), vars.end(), [](const TypedVar& a, const TypedVar& b) { return a.name < b.name; });
    for (const auto& v : vars) slots_.push_back({-1, v.name, v.type});
    values_.resize(std::max<std::size_t>(64, slots_.size() * 2));
  }

  bool run() { return step(0); }

 private:
  bool step(std::size_t i) {
    if (i == slots_.size()) {
      if (records_.size() != target_) return true;
      return visit_(materialize());
    }
    const Slot slot = slots_[i];
    switch (slot.type.kind) {
      case ScalarKind::Int: {
        const auto& dom = slot.owner < 0 ? space_.var_values : space_.field_values;
        for (auto v : dom) {
          values_[i] = v;
          if (!step(i + 1)) return false;
        }
        return true;
      }
      case ScalarKind::Bool:
        for (std::int64_t v : {0, 1}) {
          values_[i] = v;
          if (!step(i + 1)) return false;
        }
        return true;
      case ScalarKind::Ref: {
        values_[i] = -1;
        if (!step(i + 1)) return false;
        for (std::size_t r = 0; r < records_.size(); ++r) {
          if (records_[r] != slot.type.record) continue;
          values_[i] = static_cast<std::int64_t>(r);
          if (!step(i + 1)) return false;
        }
        if (records_.size() < target_) {
          const RecordDecl* decl = space_.schema ? space_.schema->find(slot.type.record) : nullptr;
          if (!decl) throw Error(fmt::format("unknown record type '{}'", slot.type.record));
          const int idx = static_cast<int>(records_.size());
          records_.push_back(decl->name);
          const std::size_t old = slots_.size();
          auto fields = decl->fields;
          std::sort(fields.begin(), fields.end(), [](const FieldDecl& a, const FieldDecl& b) { return a.name < b.name; });
          for (const auto& f : fields) slots_.push_back({idx, f.name, f.type});
          if (values_.size() < slots_.size()) values_.resize(slots_.size() * 2);
          values_[i] = idx;
          bool cont = step(i + 1);
          slots_.resize(old);
          records_.pop_back();
          if (!cont) return false;
        }
        return true;
      }
    }
    return true;
  }

  MemoryGraph materialize() const {
    MemoryGraph g;
    std::vector<NodeId> ids;
    ids.reserve(records_.size());
    for (const auto& r : records_) ids.push_back(g.add_record(r));
    for (std::size_t i = 0; i < slots_.size(); ++i) {
      const auto& s = slots_[i];
      NodeId src = s.owner < 0 ? kInitNode : ids[static_cast<std::size_t>(s.owner)];
      NodeId dst;
      if (s.type.is_ref()) {
        dst = values_[i] < 0 ? kNullNode : ids[static_cast<std::size_t>(values_[i])];
      } else {
        dst = g.add_value(s.type.to_string(), values_[i]);
      }
      g.set_edge(src, s.label, dst);
    }
    return g;
  }

  const GraphSpace& space_;
  std::size_t target_;
  const std::function<bool(const MemoryGraph&)>& visit_;
  std::vector<Slot> slots_;
  std::vector<std::string> records_;
  std::vector<std::int64_t> values_ = std::vector<std::int64_t>(64, 0);
};

}  // namespace

void enumerate_graphs(const GraphSpace& space, const std::function<bool(const MemoryGraph&)>& visit) {
  for (std::size_t n = 0; n <= space.max_nodes; ++n) {
    Enumerator e(space, n, visit);
    if (!e.run()) return;
  }
}

std::size_t count_graphs(const GraphSpace& space) {
  std::size_t count = 0;
  enumerate_graphs(space, [&](const MemoryGraph&) {
    ++count;
    return true;
  });
  return count;
}

}  // namespace slearner
