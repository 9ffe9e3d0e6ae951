#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace patch_triage {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

/// Half-open byte range [begin, end) into the parsed text.
struct ByteSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool contains(const ByteSpan& other) const {
    return begin <= other.begin && other.end <= end;
  }
  friend bool operator==(const ByteSpan&, const ByteSpan&) = default;
};

struct Node {
  std::string type;
  std::optional<std::string> label;
  ByteSpan span;
  NodeId parent = kNoNode;
  std::vector<NodeId> children;
};

class SyntaxTree;

/// Collects nodes in any order and freezes them into a preorder-numbered
/// SyntaxTree. The first node added must be the root.
class TreeBuilder {
 public:
  NodeId add(std::string type, std::optional<std::string> label, ByteSpan span,
             NodeId parent);
  void set_span(NodeId id, ByteSpan span) { nodes_[static_cast<std::size_t>(id)].span = span; }
  void set_label(NodeId id, std::optional<std::string> label) {
    nodes_[static_cast<std::size_t>(id)].label = std::move(label);
  }
  /// Drops every node added after the first `node_count`; used by parsers
  /// that backtrack.
  void truncate(std::size_t node_count);
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }

  SyntaxTree build() &&;

 private:
  std::vector<Node> nodes_;
};

/// Immutable rooted ordered tree. Node ids are preorder indices, so the root
/// is 0 and the subtree of `n` occupies ids [n, n + subtree_size(n)).
class SyntaxTree {
 public:
  /// A tree made of a single root node.
  explicit SyntaxTree(std::string root_type = "translation_unit", ByteSpan span = {});

  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return 0; }
  const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const std::string& type(NodeId id) const { return node(id).type; }
  const std::optional<std::string>& label(NodeId id) const { return node(id).label; }
  NodeId parent(NodeId id) const { return node(id).parent; }
  std::span<const NodeId> children(NodeId id) const { return node(id).children; }

  /// Leaves have height 1.
  int height(NodeId id) const { return heights_[static_cast<std::size_t>(id)]; }
  /// Number of nodes in the subtree rooted at `id`, including `id`.
  std::size_t subtree_size(NodeId id) const { return sizes_[static_cast<std::size_t>(id)]; }
  /// Structural hash over (type, label, children) used to short-circuit
  /// isomorphism checks.
  std::uint64_t subtree_hash(NodeId id) const { return hashes_[static_cast<std::size_t>(id)]; }
  bool is_descendant(NodeId ancestor, NodeId id) const {
    return id > ancestor &&
           static_cast<std::size_t>(id) < static_cast<std::size_t>(ancestor) + subtree_size(ancestor);
  }
  int position_in_parent(NodeId id) const;
  const std::vector<NodeId>& postorder() const { return postorder_; }

  /// Deep copy of the subtree rooted at `id`. Spans are kept as-is unless
  /// `rebase` is set, in which case they are shifted so the new root begins
  /// at offset 0.
  SyntaxTree subtree(NodeId id, bool rebase = false) const;

  /// New tree whose root has type `root_type` and whose children are copies
  /// of the given subtrees, in order.
  SyntaxTree graft(const std::string& root_type, ByteSpan root_span,
                   std::span<const NodeId> subtrees) const;

  /// One line per node, indented by depth: `type [label] @begin-end`.
  std::string dump() const;

  /// Checks the structural invariants (single root, nested and ordered
  /// spans). Returns an empty string when they hold.
  std::string check_invariants() const;

 private:
  friend class TreeBuilder;
  SyntaxTree(std::vector<Node> nodes);
  void finalize();

  std::vector<Node> nodes_;
  std::vector<int> heights_;
  std::vector<std::size_t> sizes_;
  std::vector<std::uint64_t> hashes_;
  std::vector<NodeId> postorder_;
};

/// True when the subtrees rooted at `a` in `ta` and `b` in `tb` have equal
/// types, labels and child order, recursively.
bool isomorphic(const SyntaxTree& ta, NodeId a, const SyntaxTree& tb, NodeId b);

}  // namespace patch_triage
