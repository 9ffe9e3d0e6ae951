#include "patch_triage/tree_matcher.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace patch_triage {

std::size_t TreeMapping::size() const {
  return static_cast<std::size_t>(
      std::count_if(src_to_dst_.begin(), src_to_dst_.end(), [](NodeId d) { return d != kNoNode; }));
}

std::vector<std::pair<NodeId, NodeId>> TreeMapping::pairs() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (std::size_t i = 0; i < src_to_dst_.size(); ++i) {
    if (src_to_dst_[i] != kNoNode) out.emplace_back(static_cast<NodeId>(i), src_to_dst_[i]);
  }
  return out;
}

namespace {

// Zhang & Shasha tree edit distance between two subtrees, used to recover
// mappings the greedy phases missed. Costs: insert = delete = 1, relabel = 0
// or 1 by label, never across types.
class ZhangShasha {
 public:
  ZhangShasha(const SyntaxTree& t1, NodeId r1, const SyntaxTree& t2, NodeId r2)
      : s1_(t1, r1), s2_(t2, r2),
        cols_(s2_.size() + 1),
        tree_dist_((s1_.size() + 1) * cols_, 0.0),
        forest_dist_((s1_.size() + 1) * cols_, 0.0) {}

  std::vector<std::pair<NodeId, NodeId>> matching() {
    for (int k1 : s1_.keyroots) {
      for (int k2 : s2_.keyroots) forest(k1, k2);
    }
    std::vector<std::pair<NodeId, NodeId>> out;
    std::vector<std::pair<int, int>> pending{{s1_.size(), s2_.size()}};
    bool root_pair = true;
    while (!pending.empty()) {
      auto [last_row, last_col] = pending.back();
      pending.pop_back();
      if (!root_pair) forest(last_row, last_col);
      root_pair = false;
      const int first_row = s1_.lmd[static_cast<std::size_t>(last_row)];
      const int first_col = s2_.lmd[static_cast<std::size_t>(last_col)];
      int row = last_row, col = last_col;
      while (row > first_row || col > first_col) {
        if (row > first_row && fd(row - 1, col) + 1 == fd(row, col)) {
          --row;
        } else if (col > first_col && fd(row, col - 1) + 1 == fd(row, col)) {
          --col;
        } else {
          const int lmd1 = s1_.lmd[static_cast<std::size_t>(row)];
          const int lmd2 = s2_.lmd[static_cast<std::size_t>(col)];
          if (lmd1 == first_row && lmd2 == first_col) {
            out.emplace_back(s1_.node(row), s2_.node(col));
            --row;
            --col;
          } else {
            pending.emplace_back(row, col);
            row = lmd1;
            col = lmd2;
          }
        }
      }
    }
    return out;
  }

 private:
  // 1-based postorder view of a subtree; index 0 is the empty forest.
  // lmd[i] is the index just before node i's leftmost leaf, i.e. the empty
  // forest to its left.
  struct Sub {
    Sub(const SyntaxTree& tree, NodeId root) : tree(tree) {
      nodes.push_back(kNoNode);
      lmd.push_back(0);
      walk(root);
      for (std::size_t i = 1; i < lmd.size(); ++i) --lmd[i];
      std::set<int> seen;
      for (int i = size(); i >= 1; --i) {
        if (seen.insert(lmd[static_cast<std::size_t>(i)]).second) keyroots.push_back(i);
      }
      std::reverse(keyroots.begin(), keyroots.end());
    }
    int walk(NodeId id) {
      int leftmost = -1;
      for (NodeId c : tree.children(id)) {
        const int l = walk(c);
        if (leftmost < 0) leftmost = l;
      }
      nodes.push_back(id);
      const int index = static_cast<int>(nodes.size()) - 1;
      lmd.push_back(leftmost < 0 ? index : leftmost);
      return lmd.back();
    }
    int size() const { return static_cast<int>(nodes.size()) - 1; }
    NodeId node(int i) const { return nodes[static_cast<std::size_t>(i)]; }

    const SyntaxTree& tree;
    std::vector<NodeId> nodes;
    std::vector<int> lmd;
    std::vector<int> keyroots;
  };

  double& fd(int i, int j) { return forest_dist_[static_cast<std::size_t>(i) * cols_ + static_cast<std::size_t>(j)]; }
  double& td(int i, int j) { return tree_dist_[static_cast<std::size_t>(i) * cols_ + static_cast<std::size_t>(j)]; }

  double update_cost(int i, int j) const {
    const NodeId a = s1_.node(i), b = s2_.node(j);
    if (s1_.tree.type(a) != s2_.tree.type(b)) return std::numeric_limits<double>::max() / 4;
    return s1_.tree.label(a) == s2_.tree.label(b) ? 0.0 : 1.0;
  }

  void forest(int i, int j) {
    const int l1 = s1_.lmd[static_cast<std::size_t>(i)];
    const int l2 = s2_.lmd[static_cast<std::size_t>(j)];
    fd(l1, l2) = 0;
    for (int d1 = l1 + 1; d1 <= i; ++d1) fd(d1, l2) = fd(d1 - 1, l2) + 1;
    for (int d2 = l2 + 1; d2 <= j; ++d2) fd(l1, d2) = fd(l1, d2 - 1) + 1;
    for (int d1 = l1 + 1; d1 <= i; ++d1) {
      for (int d2 = l2 + 1; d2 <= j; ++d2) {
        const int dl1 = s1_.lmd[static_cast<std::size_t>(d1)];
        const int dl2 = s2_.lmd[static_cast<std::size_t>(d2)];
        if (dl1 == l1 && dl2 == l2) {
          fd(d1, d2) = std::min({fd(d1 - 1, d2) + 1, fd(d1, d2 - 1) + 1,
                                 fd(d1 - 1, d2 - 1) + update_cost(d1, d2)});
          td(d1, d2) = fd(d1, d2);
        } else {
          fd(d1, d2) = std::min({fd(d1 - 1, d2) + 1, fd(d1, d2 - 1) + 1, fd(dl1, dl2) + td(d1, d2)});
        }
      }
    }
  }

  Sub s1_;
  Sub s2_;
  std::size_t cols_;
  std::vector<double> tree_dist_;
  std::vector<double> forest_dist_;
};

class Matcher {
 public:
  Matcher(const SyntaxTree& before, const SyntaxTree& after, const MatcherOptions& options)
      : t1_(before), t2_(after), options_(options), mapping_(before.size(), after.size()) {}

  TreeMapping run() {
    top_down();
    bottom_up();
    return std::move(mapping_);
  }

 private:
  // Nodes waiting in the top-down priority list, grouped by height.
  struct HeightList {
    const SyntaxTree& tree;
    std::vector<NodeId> ids;

    int peek_max() const {
      int h = 0;
      for (NodeId id : ids) h = std::max(h, tree.height(id));
      return h;
    }
    std::vector<NodeId> pop(int height) {
      std::vector<NodeId> out, rest;
      for (NodeId id : ids) (tree.height(id) == height ? out : rest).push_back(id);
      ids = std::move(rest);
      std::sort(out.begin(), out.end());
      return out;
    }
    void open(NodeId id) {
      for (NodeId c : tree.children(id)) ids.push_back(c);
    }
  };

  void top_down() {
    HeightList l1{t1_, {t1_.root()}};
    HeightList l2{t2_, {t2_.root()}};
    while (true) {
      const int h1 = l1.peek_max();
      const int h2 = l2.peek_max();
      if (std::min(h1, h2) < options_.min_height) break;
      if (h1 > h2) {
        for (NodeId id : l1.pop(h1)) l1.open(id);
        continue;
      }
      if (h2 > h1) {
        for (NodeId id : l2.pop(h2)) l2.open(id);
        continue;
      }
      const auto c1 = l1.pop(h1);
      const auto c2 = l2.pop(h2);
      for (NodeId a : c1) {
        for (NodeId b : c2) {
          if (mapping_.has_dst(b) || !isomorphic(t1_, a, t2_, b)) continue;
          for (NodeId k = 0; k < static_cast<NodeId>(t1_.subtree_size(a)); ++k) {
            mapping_.link(a + k, b + k);
          }
          break;
        }
      }
      for (NodeId a : c1) {
        if (!mapping_.has_src(a)) l1.open(a);
      }
      for (NodeId b : c2) {
        if (!mapping_.has_dst(b)) l2.open(b);
      }
    }
  }

  bool has_mapped_descendant(NodeId a) const {
    const auto end = a + static_cast<NodeId>(t1_.subtree_size(a));
    for (NodeId d = a + 1; d < end; ++d) {
      if (mapping_.has_src(d)) return true;
    }
    return false;
  }

  void bottom_up() {
    for (NodeId a : t1_.postorder()) {
      if (a == t1_.root()) {
        if (!mapping_.has_src(a) && !mapping_.has_dst(t2_.root()) &&
            t1_.type(a) == t2_.type(t2_.root())) {
          mapping_.link(a, t2_.root());
          recover(a, t2_.root());
        }
        break;
      }
      if (mapping_.has_src(a) || !has_mapped_descendant(a)) continue;

      std::set<NodeId> candidates;
      const auto end = a + static_cast<NodeId>(t1_.subtree_size(a));
      for (NodeId d = a + 1; d < end; ++d) {
        if (!mapping_.has_src(d)) continue;
        for (NodeId p = t2_.parent(mapping_.dst(d)); p != kNoNode; p = t2_.parent(p)) {
          if (!mapping_.has_dst(p) && t2_.type(p) == t1_.type(a)) candidates.insert(p);
        }
      }
      NodeId best = kNoNode;
      double best_dice = -1.0;
      for (NodeId b : candidates) {  // ascending preorder: first wins ties
        const double dice = dice_similarity(t1_, a, t2_, b, mapping_);
        if (dice > best_dice) {
          best_dice = dice;
          best = b;
        }
      }
      if (best != kNoNode && best_dice >= options_.min_dice) {
        mapping_.link(a, best);
        recover(a, best);
      }
    }
  }

  void recover(NodeId a, NodeId b) {
    if (std::max(t1_.subtree_size(a), t2_.subtree_size(b)) > options_.max_recovery_size) return;
    ZhangShasha zs(t1_, a, t2_, b);
    for (const auto& [x, y] : zs.matching()) {
      if (!mapping_.has_src(x) && !mapping_.has_dst(y) && t1_.type(x) == t2_.type(y)) {
        mapping_.link(x, y);
      }
    }
  }

  const SyntaxTree& t1_;
  const SyntaxTree& t2_;
  const MatcherOptions& options_;
  TreeMapping mapping_;
};

}  // namespace

double dice_similarity(const SyntaxTree& before, NodeId a, const SyntaxTree& after, NodeId b,
                       const TreeMapping& mapping) {
  const std::size_t n1 = before.subtree_size(a) - 1;
  const std::size_t n2 = after.subtree_size(b) - 1;
  if (n1 + n2 == 0) return 0.0;
  std::size_t common = 0;
  const auto end = a + static_cast<NodeId>(before.subtree_size(a));
  for (NodeId d = a + 1; d < end; ++d) {
    const NodeId m = mapping.dst(d);
    if (m != kNoNode && after.is_descendant(b, m)) ++common;
  }
  return 2.0 * static_cast<double>(common) / static_cast<double>(n1 + n2);
}

TreeMapping match_trees(const SyntaxTree& before, const SyntaxTree& after,
                        const MatcherOptions& options) {
  return Matcher(before, after, options).run();
}

std::string validate_mapping(const SyntaxTree& before, const SyntaxTree& after,
                             const TreeMapping& mapping) {
  if (mapping.before_size() != before.size() || mapping.after_size() != after.size()) {
    return "mapping dimensions do not match the trees";
  }
  for (NodeId a = 0; a < static_cast<NodeId>(before.size()); ++a) {
    const NodeId b = mapping.dst(a);
    if (b == kNoNode) continue;
    if (b < 0 || static_cast<std::size_t>(b) >= after.size()) return "after id out of range";
    if (mapping.src(b) != a) return "mapping is not injective at before node " + std::to_string(a);
    if (before.type(a) != after.type(b)) {
      return "type mismatch: " + before.type(a) + " -> " + after.type(b);
    }
  }
  for (NodeId b = 0; b < static_cast<NodeId>(after.size()); ++b) {
    const NodeId a = mapping.src(b);
    if (a != kNoNode && (a < 0 || static_cast<std::size_t>(a) >= before.size() || mapping.dst(a) != b)) {
      return "mapping is not injective at after node " + std::to_string(b);
    }
  }
  return {};
}

}  // namespace patch_triage
