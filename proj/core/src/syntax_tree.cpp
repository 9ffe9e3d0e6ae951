#include "patch_triage/syntax_tree.hpp"

#include <algorithm>
#include <cassert>
#include <functional>
#include <sstream>

namespace patch_triage {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
  // boost::hash_combine, widened
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

}  // namespace

NodeId TreeBuilder::add(std::string type, std::optional<std::string> label, ByteSpan span,
                        NodeId parent) {
  const auto id = static_cast<NodeId>(nodes_.size());
  assert((parent == kNoNode) == nodes_.empty() && "first node must be the only root");
  nodes_.push_back(Node{std::move(type), std::move(label), span, parent, {}});
  if (parent != kNoNode) nodes_[static_cast<std::size_t>(parent)].children.push_back(id);
  return id;
}

void TreeBuilder::truncate(std::size_t node_count) {
  while (nodes_.size() > node_count) {
    const NodeId parent = nodes_.back().parent;
    if (parent != kNoNode) {
      auto& siblings = nodes_[static_cast<std::size_t>(parent)].children;
      siblings.erase(std::remove(siblings.begin(), siblings.end(),
                                 static_cast<NodeId>(nodes_.size() - 1)),
                     siblings.end());
    }
    nodes_.pop_back();
  }
}

SyntaxTree TreeBuilder::build() && {
  if (nodes_.empty()) return SyntaxTree();
  // Renumber into preorder.
  std::vector<NodeId> order;
  order.reserve(nodes_.size());
  std::vector<NodeId> stack{0};
  while (!stack.empty()) {
    const NodeId id = stack.back();
    stack.pop_back();
    order.push_back(id);
    const auto& kids = nodes_[static_cast<std::size_t>(id)].children;
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(*it);
  }
  std::vector<NodeId> new_id(nodes_.size(), kNoNode);
  for (std::size_t i = 0; i < order.size(); ++i) new_id[static_cast<std::size_t>(order[i])] = static_cast<NodeId>(i);
  std::vector<Node> out;
  out.reserve(order.size());
  for (NodeId old : order) {
    Node n = std::move(nodes_[static_cast<std::size_t>(old)]);
    if (n.parent != kNoNode) n.parent = new_id[static_cast<std::size_t>(n.parent)];
    for (auto& c : n.children) c = new_id[static_cast<std::size_t>(c)];
    out.push_back(std::move(n));
  }
  nodes_.clear();
  return SyntaxTree(std::move(out));
}

SyntaxTree::SyntaxTree(std::string root_type, ByteSpan span) {
  nodes_.push_back(Node{std::move(root_type), std::nullopt, span, kNoNode, {}});
  finalize();
}

SyntaxTree::SyntaxTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) { finalize(); }

void SyntaxTree::finalize() {
  const std::size_t n = nodes_.size();
  heights_.assign(n, 1);
  sizes_.assign(n, 1);
  hashes_.assign(n, 0);
  postorder_.clear();
  postorder_.reserve(n);
  std::hash<std::string> hs;
  // Preorder numbering: children always have larger ids than their parent,
  // so a reverse sweep visits every child before its parent.
  for (std::size_t i = n; i-- > 0;) {
    const Node& node = nodes_[i];
    std::uint64_t h = hs(node.type);
    h = mix(h, node.label ? hs(*node.label) + 1 : 0);
    for (NodeId c : node.children) {
      const auto ci = static_cast<std::size_t>(c);
      heights_[i] = std::max(heights_[i], heights_[ci] + 1);
      sizes_[i] += sizes_[ci];
      h = mix(h, hashes_[ci]);
    }
    hashes_[i] = mix(h, node.children.size());
  }
  std::vector<std::pair<NodeId, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto& [id, next] = stack.back();
    const auto& kids = nodes_[static_cast<std::size_t>(id)].children;
    if (next < kids.size()) {
      const NodeId child = kids[next++];
      stack.emplace_back(child, 0);
    } else {
      postorder_.push_back(id);
      stack.pop_back();
    }
  }
}

int SyntaxTree::position_in_parent(NodeId id) const {
  const NodeId p = parent(id);
  if (p == kNoNode) return 0;
  const auto kids = children(p);
  return static_cast<int>(std::find(kids.begin(), kids.end(), id) - kids.begin());
}

SyntaxTree SyntaxTree::subtree(NodeId id, bool rebase) const {
  const std::size_t first = static_cast<std::size_t>(id);
  const std::size_t count = subtree_size(id);
  const std::size_t shift = rebase ? node(id).span.begin : 0;
  std::vector<Node> out(nodes_.begin() + static_cast<std::ptrdiff_t>(first),
                        nodes_.begin() + static_cast<std::ptrdiff_t>(first + count));
  for (auto& n : out) {
    n.parent = n.parent == kNoNode || n.parent < id ? kNoNode : n.parent - id;
    for (auto& c : n.children) c -= id;
    n.span.begin -= shift;
    n.span.end -= shift;
  }
  out.front().parent = kNoNode;
  return SyntaxTree(std::move(out));
}

SyntaxTree SyntaxTree::graft(const std::string& root_type, ByteSpan root_span,
                             std::span<const NodeId> subtrees) const {
  std::vector<Node> out;
  out.push_back(Node{root_type, std::nullopt, root_span, kNoNode, {}});
  for (NodeId sub : subtrees) {
    const auto base = static_cast<NodeId>(out.size());
    out.front().children.push_back(base);
    for (std::size_t k = 0; k < subtree_size(sub); ++k) {
      Node n = nodes_[static_cast<std::size_t>(sub) + k];
      n.parent = k == 0 ? 0 : n.parent - sub + base;
      for (auto& c : n.children) c = c - sub + base;
      out.push_back(std::move(n));
    }
  }
  return SyntaxTree(std::move(out));
}

std::string SyntaxTree::dump() const {
  std::ostringstream os;
  std::vector<int> depth(nodes_.size(), 0);
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (n.parent != kNoNode) depth[i] = depth[static_cast<std::size_t>(n.parent)] + 1;
    os << std::string(static_cast<std::size_t>(depth[i]) * 2, ' ') << n.type;
    if (n.label) os << " [" << *n.label << "]";
    os << " @" << n.span.begin << "-" << n.span.end << "\n";
  }
  return os.str();
}

std::string SyntaxTree::check_invariants() const {
  if (nodes_.empty()) return "empty tree";
  if (nodes_.front().parent != kNoNode) return "root has a parent";
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    if (i > 0 && n.parent == kNoNode) return "more than one root";
    if (n.span.begin > n.span.end) return "inverted span at node " + std::to_string(i);
    std::size_t cursor = n.span.begin;
    for (NodeId c : n.children) {
      const Node& child = nodes_[static_cast<std::size_t>(c)];
      if (child.parent != static_cast<NodeId>(i)) return "parent link broken at node " + std::to_string(c);
      if (!n.span.contains(child.span)) return "child span escapes parent at node " + std::to_string(c);
      if (child.span.begin < cursor) return "overlapping siblings at node " + std::to_string(c);
      cursor = child.span.end;
    }
  }
  return {};
}

bool isomorphic(const SyntaxTree& ta, NodeId a, const SyntaxTree& tb, NodeId b) {
  if (ta.subtree_hash(a) != tb.subtree_hash(b)) return false;
  if (ta.subtree_size(a) != tb.subtree_size(b)) return false;
  // Preorder layout makes isomorphic subtrees line up node-for-node.
  for (std::size_t k = 0; k < ta.subtree_size(a); ++k) {
    const Node& x = ta.node(a + static_cast<NodeId>(k));
    const Node& y = tb.node(b + static_cast<NodeId>(k));
    if (x.type != y.type || x.label != y.label || x.children.size() != y.children.size()) {
      return false;
    }
  }
  return true;
}

}  // namespace patch_triage
