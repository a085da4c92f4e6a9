#pragma once

// Concrete program states as memory graphs (M, init, E, Ty, L).
//
// Node 0 is always `init`, node 1 is always `null`. Every program variable is
// an edge out of `init`; primitive values live on dedicated value nodes, so a
// numeric variable `n` is the edge init -n-> v with val(v) = n.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slearner/common.hpp"

namespace slearner {

using NodeId = std::uint32_t;
inline constexpr NodeId kInitNode = 0;
inline constexpr NodeId kNullNode = 1;

enum class NodeKind : std::uint8_t { Init, Null, Record, Value };

struct Edge {
  std::string label;
  NodeId target = kNullNode;
};

/// A rooted access path such as `y.next`: a variable name followed by field
/// labels.
class Path {
 public:
  explicit Path(std::vector<std::string> labels);
  explicit Path(std::string variable) : Path(std::vector<std::string>{std::move(variable)}) {}

  /// Parses the dotted form `a.b.c`.
  static Path parse(std::string_view dotted);

  const std::string& root() const { return labels_.front(); }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  bool is_variable() const { return labels_.size() == 1; }

  Path extend(std::string label) const;
  /// The path without its last label. Requires size() > 1.
  Path parent() const;
  std::string to_string() const;

  friend auto operator<=>(const Path&, const Path&) = default;
  friend bool operator==(const Path&, const Path&) = default;

 private:
  std::vector<std::string> labels_;
};

class MemoryGraph {
 public:
  MemoryGraph();

  NodeId add_record(std::string type);
  NodeId add_value(std::string type, std::int64_t value);

  /// Inserts or replaces the out-edge of `src` labelled `label`.
  void set_edge(NodeId src, std::string label, NodeId dst);
  void remove_edge(NodeId src, std::string_view label);

  std::optional<NodeId> target(NodeId src, std::string_view label) const;
  /// Out-edges sorted by label.
  std::span<const Edge> edges(NodeId n) const { return nodes_[n].out; }

  std::size_t node_count() const { return nodes_.size(); }
  NodeKind kind(NodeId n) const { return nodes_[n].kind; }
  const std::string& type(NodeId n) const { return nodes_[n].type; }
  /// Value label L(n); defined exactly on value nodes.
  std::optional<std::int64_t> value(NodeId n) const;

  bool is_record(NodeId n) const { return nodes_[n].kind == NodeKind::Record; }
  bool is_value(NodeId n) const { return nodes_[n].kind == NodeKind::Value; }

  /// Variable names, i.e. labels of the init edges, sorted.
  std::vector<std::string> variables() const;

  /// Nodes reachable from `from`, including `from` itself, excluding null.
  /// Returned in ascending id order.
  std::vector<NodeId> reach(NodeId from) const;
  /// Nodes reachable from init through any variable, excluding init and null.
  std::vector<NodeId> reachable_from_variables() const;

  /// Breadth-first renumbering from init with sorted labels; drops nodes
  /// unreachable from init. Isomorphic graphs have equal canonical forms.
  MemoryGraph canonical() const;
  /// Canonical form restricted to the listed variables.
  MemoryGraph project(std::span<const std::string> vars) const;
  /// Compact string encoding of the canonical form (equality key).
  std::string encode() const;
  /// Debug dump: `type(n)=T`, `val(n)=k` and `src -label-> dst` lines in
  /// canonical order.
  std::string dump() const;

  /// Throws Error when a structural invariant is broken.
  void validate() const;

  /// Renumbers nodes with `perm` (perm[old] = new); init and null must stay
  /// fixed. Used by isomorphism tests.
  MemoryGraph permuted(std::span<const NodeId> perm) const;

 private:
  struct NodeData {
    NodeKind kind;
    std::string type;
    std::int64_t value = 0;
    std::vector<Edge> out;
  };
  std::vector<NodeData> nodes_;
};

/// Follows `path` from init. Undefined when a label is missing or the walk
/// passes through null.
std::optional<NodeId> resolve(const MemoryGraph& g, const Path& path);

/// All resolvable rooted paths of length <= k, breadth-first with variables
/// and labels in lexicographic order.
std::vector<Path> variables_within_bound(const MemoryGraph& g, std::size_t k);

/// 1 iff the non-null reach sets of `a` and `b` are disjoint; 0 if they
/// overlap; NA if either path does not resolve.
Tri separated(const MemoryGraph& g, const Path& a, const Path& b);

// ---------------------------------------------------------------------------
// Bounded enumeration of well-formed graphs.

struct GraphSpace {
  const Schema* schema = nullptr;
  /// Variables bound at init. Ref variables may point to null or any node.
  std::vector<TypedVar> vars;
  std::size_t max_nodes = 0;
  /// Domain of numeric variables.
  std::vector<std::int64_t> var_values{0};
  /// Domain of int-typed record fields.
  std::vector<std::int64_t> field_values{0};
};

/// Calls `visit` on every graph of `space` up to isomorphism, in order of
/// increasing record-node count; stops early when `visit` returns false.
/// Only nodes reachable from the variables are generated, and each canonical
/// graph is produced exactly once.
void enumerate_graphs(const GraphSpace& space,
                      const std::function<bool(const MemoryGraph&)>& visit);

std::size_t count_graphs(const GraphSpace& space);

}  // namespace slearner
