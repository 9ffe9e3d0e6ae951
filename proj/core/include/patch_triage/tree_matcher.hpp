#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "patch_triage/syntax_tree.hpp"

namespace patch_triage {

/// Injective partial map between the nodes of a before-tree and an
/// after-tree.
class TreeMapping {
 public:
  TreeMapping(std::size_t before_size, std::size_t after_size)
      : src_to_dst_(before_size, kNoNode), dst_to_src_(after_size, kNoNode) {}

  void link(NodeId before, NodeId after) {
    src_to_dst_[static_cast<std::size_t>(before)] = after;
    dst_to_src_[static_cast<std::size_t>(after)] = before;
  }
  bool has_src(NodeId before) const { return dst(before) != kNoNode; }
  bool has_dst(NodeId after) const { return src(after) != kNoNode; }
  NodeId dst(NodeId before) const { return src_to_dst_[static_cast<std::size_t>(before)]; }
  NodeId src(NodeId after) const { return dst_to_src_[static_cast<std::size_t>(after)]; }

  std::size_t before_size() const { return src_to_dst_.size(); }
  std::size_t after_size() const { return dst_to_src_.size(); }
  std::size_t size() const;
  /// Mapped pairs ordered by before-node id.
  std::vector<std::pair<NodeId, NodeId>> pairs() const;

 private:
  std::vector<NodeId> src_to_dst_;
  std::vector<NodeId> dst_to_src_;
};

struct MatcherOptions {
  /// Smallest subtree height considered by the top-down phase.
  int min_height = 2;
  /// Bottom-up phase accepts a container pair at or above this dice score.
  double min_dice = 0.5;
  /// Containers up to this many nodes get an optimal (Zhang-Shasha) pass to
  /// recover leftover leaf mappings.
  std::size_t max_recovery_size = 100;
};

/// GumTree-style two-phase matcher: greedy top-down matching of isomorphic
/// subtrees, then bottom-up container matching by dice coefficient with an
/// optimal recovery pass for small containers.
TreeMapping match_trees(const SyntaxTree& before, const SyntaxTree& after,
                        const MatcherOptions& options = {});

/// Empty when `mapping` is injective, in range, and only pairs nodes of the
/// same type; otherwise a description of the first violation.
std::string validate_mapping(const SyntaxTree& before, const SyntaxTree& after,
                             const TreeMapping& mapping);

/// Fraction of the descendants of `a` and `b` that are mapped onto each
/// other: 2 * common / (|desc(a)| + |desc(b)|). Zero when both are leaves.
double dice_similarity(const SyntaxTree& before, NodeId a, const SyntaxTree& after, NodeId b,
                       const TreeMapping& mapping);

}  // namespace patch_triage
