#include "patch_triage/patch_cleaner.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "patch_triage/c_grammar.hpp"
#include "patch_triage/error.hpp"

namespace patch_triage {

void RuleRegistry::add(CleanerRule rule) {
  if (find(rule.rule_id)) throw Error("duplicate cleaner rule '" + rule.rule_id + "'");
  rules_.push_back(std::move(rule));
}

const CleanerRule* RuleRegistry::find(std::string_view rule_id) const {
  for (const auto& r : rules_) {
    if (r.rule_id == rule_id) return &r;
  }
  return nullptr;
}

RuleRegistry RuleRegistry::select(const std::vector<std::string>& rule_ids) const {
  RuleRegistry out;
  for (const auto& id : rule_ids) {
    const CleanerRule* rule = find(id);
    if (!rule) throw Error("unknown cleaner rule '" + id + "'");
    out.add(*rule);
  }
  return out;
}

namespace {

std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

bool ws_only(const ChangeGroup& g) {
  return whitespace_tokens(g.before_snippet) == whitespace_tokens(g.after_snippet);
}

bool comment_only(const ChangeGroup& g) {
  if (g.before_snippet == g.after_snippet) return false;
  if (g.script && !g.script->empty()) return false;
  // Literal labels are normalized in scripts, so lexemes decide.
  const CLikeGrammar grammar;
  return grammar.lexemes(g.before_snippet) == grammar.lexemes(g.after_snippet);
}

// Records old -> new and new -> old; false once either direction conflicts.
class Bijection {
 public:
  bool add(const std::string& from, const std::string& to) {
    auto [fwd, fwd_new] = forward_.emplace(from, to);
    auto [bwd, bwd_new] = backward_.emplace(to, from);
    return fwd->second == to && bwd->second == from;
  }

 private:
  std::map<std::string, std::string> forward_, backward_;
};

bool rename_only(const ChangeGroup& g) {
  const CLikeGrammar grammar;
  Bijection names;
  if (g.script) {
    if (g.script->empty()) return false;
    for (const auto& a : g.script->actions) {
      if (a.kind != ActionKind::Update || !grammar.is_identifier_type(a.node_type) || !a.old_label ||
          !a.label || !names.add(*a.old_label, *a.label)) {
        return false;
      }
    }
    return true;
  }
  const auto before = tokenize_c(g.before_snippet, false);
  const auto after = tokenize_c(g.after_snippet, false);
  if (before.empty() || before.size() != after.size()) return false;
  bool renamed = false;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i].text == after[i].text) continue;
    if (before[i].kind != TokenKind::Identifier || after[i].kind != TokenKind::Identifier ||
        !names.add(before[i].text, after[i].text)) {
      return false;
    }
    renamed = true;
  }
  return renamed;
}

}  // namespace

RuleRegistry RuleRegistry::builtin() {
  RuleRegistry r;
  r.add({"ws-only", "before and after differ only in whitespace", ws_only});
  r.add({"comment-only", "code is unchanged once comments are stripped", comment_only});
  r.add({"rename-only", "only identifiers change, under a consistent one-to-one renaming", rename_only});
  return r;
}

CleanReport apply_rules(const std::string& vuln_id, const std::vector<ChangeGroup>& groups,
                        const RuleRegistry& registry) {
  CleanReport report;
  report.vuln_id = vuln_id;
  for (const auto& g : groups) {
    const auto& rules = registry.rules();
    const auto hit = std::find_if(rules.begin(), rules.end(), [&](const CleanerRule& r) { return r.predicate(g); });
    if (hit == rules.end()) {
      report.kept.push_back(g);
    } else {
      report.removed.push_back({g, hit->rule_id});
    }
  }
  report.noise_only = !groups.empty() && report.kept.empty();
  return report;
}

}  // namespace patch_triage
