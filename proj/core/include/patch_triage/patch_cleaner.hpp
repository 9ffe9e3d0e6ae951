#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "patch_triage/change_group.hpp"

namespace patch_triage {

struct CleanerRule {
  std::string rule_id;
  std::string description;
  /// True when the group is noise.
  std::function<bool(const ChangeGroup&)> predicate;
};

/// Ordered rule collection; the first matching rule names the removal.
class RuleRegistry {
 public:
  /// Throws Error when `rule.rule_id` is already registered.
  void add(CleanerRule rule);
  const std::vector<CleanerRule>& rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }
  const CleanerRule* find(std::string_view rule_id) const;

  /// Registry holding only the named rules, in the order given. Throws
  /// Error on an unknown id.
  RuleRegistry select(const std::vector<std::string>& rule_ids) const;

  /// "ws-only", "comment-only" and "rename-only", in that order, using the
  /// C-like lexer.
  static RuleRegistry builtin();

 private:
  std::vector<CleanerRule> rules_;
};

struct RemovedGroup {
  ChangeGroup group;
  std::string rule_id;
};

struct CleanReport {
  std::string vuln_id;
  std::vector<ChangeGroup> kept;
  std::vector<RemovedGroup> removed;
  /// Every group of a non-empty input was removed.
  bool noise_only = false;
};

CleanReport apply_rules(const std::string& vuln_id, const std::vector<ChangeGroup>& groups,
                        const RuleRegistry& registry);

}  // namespace patch_triage
