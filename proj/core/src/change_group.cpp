#include "patch_triage/change_group.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <spdlog/spdlog.h>

#include "patch_triage/error.hpp"
#include "patch_triage/sequence.hpp"

namespace patch_triage {

std::string_view to_string(UnitKind kind) { return kind == UnitKind::Line ? "line" : "function"; }

UnitKind unit_kind_from_string(std::string_view text) {
  if (text == "line") return UnitKind::Line;
  if (text == "function") return UnitKind::Function;
  throw Error("unknown base unit '" + std::string(text) + "'");
}

bool is_compound(const std::vector<ChangeGroup>& groups) {
  std::set<std::string_view> ids;
  for (const auto& g : groups) ids.insert(g.unit.id);
  return ids.size() > 1;
}

namespace {

struct NumberedLine {
  std::size_t line_no;
  const std::string* text;
};

struct ChangedLines {
  std::vector<NumberedLine> removed;  // before-file line numbers
  std::vector<NumberedLine> added;    // after-file line numbers
};

// Walks every hunk, numbering removed lines on the before side and added
// lines on the after side. `on_block` receives each maximal run of changes.
template <typename OnBlock>
ChangedLines walk_changes(const FileDiff& fd, OnBlock on_block) {
  ChangedLines all;
  for (const auto& h : fd.hunks) {
    std::size_t b = h.before_len == 0 ? h.before_start + 1 : h.before_start;
    std::size_t a = h.after_len == 0 ? h.after_start + 1 : h.after_start;
    ChangedLines block;
    auto flush = [&] {
      if (!block.removed.empty() || !block.added.empty()) on_block(block);
      block = {};
    };
    for (const auto& l : h.lines) {
      switch (l.op) {
        case LineOp::Context:
          flush();
          ++b;
          ++a;
          break;
        case LineOp::Removed:
          block.removed.push_back({b, &l.text});
          all.removed.push_back({b++, &l.text});
          break;
        case LineOp::Added:
          block.added.push_back({a, &l.text});
          all.added.push_back({a++, &l.text});
          break;
      }
    }
    flush();
  }
  return all;
}

std::vector<std::string> texts(const std::vector<NumberedLine>& lines) {
  std::vector<std::string> out;
  for (const auto& l : lines) out.push_back(*l.text);
  return out;
}

std::string joined(const std::vector<NumberedLine>& lines) { return join_lines(texts(lines)); }

void group_lines(const FileDiff& fd, std::vector<ChangeGroup>& out) {
  const std::string& path = fd.path();
  walk_changes(fd, [&](const ChangedLines& block) {
    const std::size_t n = std::max(block.removed.size(), block.added.size());
    for (std::size_t i = 0; i < n; ++i) {
      ChangeGroup g;
      g.unit.kind = UnitKind::Line;
      std::vector<std::string> removed, added;
      if (i < block.removed.size()) {
        g.unit.id = path + ":" + std::to_string(block.removed[i].line_no);
        g.before_snippet = *block.removed[i].text;
        removed.push_back(g.before_snippet);
      } else {
        g.unit.id = path + ":+" + std::to_string(block.added[i].line_no);
      }
      if (i < block.added.size()) {
        g.after_snippet = *block.added[i].text;
        added.push_back(g.after_snippet);
      }
      g.encoded = encode_line_diff(removed, added);
      out.push_back(std::move(g));
    }
  });
}

// Maps byte offsets to 1-based line numbers.
class LineIndex {
 public:
  explicit LineIndex(std::string_view text) {
    starts_.push_back(0);
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '\n') starts_.push_back(i + 1);
    }
  }
  std::size_t line_of(std::size_t offset) const {
    return static_cast<std::size_t>(std::upper_bound(starts_.begin(), starts_.end(), offset) - starts_.begin());
  }
  std::pair<std::size_t, std::size_t> lines_of(const ByteSpan& span) const {
    const std::size_t first = line_of(span.begin);
    return {first, span.end > span.begin ? line_of(span.end - 1) : first};
  }

 private:
  std::vector<std::size_t> starts_;
};

struct FileSide {
  const std::string* text = nullptr;
  SyntaxTree tree;
  std::vector<FunctionInfo> functions;
  std::vector<std::pair<std::size_t, std::size_t>> line_ranges;
  std::vector<bool> changed;

  std::string snippet(std::size_t k) const {
    const ByteSpan& s = functions[k].span;
    return text->substr(s.begin, s.end - s.begin);
  }
  bool inside_function(std::size_t line) const {
    return std::any_of(line_ranges.begin(), line_ranges.end(),
                       [&](const auto& r) { return r.first <= line && line <= r.second; });
  }
};

FileSide analyse_side(const GrammarAdapter& grammar, const std::string& text, bool present,
                      const std::vector<NumberedLine>& changed_lines) {
  FileSide side;
  side.text = &text;
  if (present) side.tree = grammar.parse(text);
  side.functions = grammar.functions(side.tree);
  const LineIndex index(text);
  for (const auto& f : side.functions) side.line_ranges.push_back(index.lines_of(f.span));
  side.changed.assign(side.functions.size(), false);
  for (const auto& l : changed_lines) {
    for (std::size_t k = 0; k < side.functions.size(); ++k) {
      if (side.line_ranges[k].first <= l.line_no && l.line_no <= side.line_ranges[k].second) {
        side.changed[k] = true;
      }
    }
  }
  return side;
}

constexpr std::size_t kAbsent = static_cast<std::size_t>(-1);

std::vector<std::pair<std::size_t, std::size_t>> pair_functions(const FileSide& before, const FileSide& after,
                                                                const GrammarAdapter& grammar,
                                                                double rename_similarity) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<bool> used_after(after.functions.size(), false);
  std::vector<std::size_t> left_before;
  for (std::size_t i = 0; i < before.functions.size(); ++i) {
    const auto& fb = before.functions[i];
    bool found = false;
    for (std::size_t j = 0; j < after.functions.size() && !found; ++j) {
      const auto& fa = after.functions[j];
      if (!used_after[j] && fa.name == fb.name && fa.arity == fb.arity) {
        used_after[j] = true;
        pairs.emplace_back(i, j);
        found = true;
      }
    }
    if (!found) left_before.push_back(i);
  }
  std::vector<std::size_t> left_after;
  for (std::size_t j = 0; j < after.functions.size(); ++j) {
    if (!used_after[j]) left_after.push_back(j);
  }

  // Greedy rename alignment: best similarity first, then source order.
  std::vector<std::tuple<double, std::size_t, std::size_t>> candidates;
  std::map<std::size_t, std::vector<std::string>> after_lexemes;
  for (std::size_t j : left_after) after_lexemes[j] = grammar.lexemes(after.snippet(j));
  for (std::size_t i : left_before) {
    const auto lb = grammar.lexemes(before.snippet(i));
    for (std::size_t j : left_after) {
      const auto& la = after_lexemes[j];
      const std::size_t total = lb.size() + la.size();
      const double sim = total == 0 ? 1.0
                                    : 2.0 * static_cast<double>(lcs_length<std::string>(lb, la)) /
                                          static_cast<double>(total);
      if (sim >= rename_similarity) candidates.emplace_back(-sim, i, j);
    }
  }
  std::sort(candidates.begin(), candidates.end());
  std::set<std::size_t> taken_before, taken_after;
  for (const auto& [neg_sim, i, j] : candidates) {
    if (taken_before.count(i) || taken_after.count(j)) continue;
    taken_before.insert(i);
    taken_after.insert(j);
    pairs.emplace_back(i, j);
  }
  for (std::size_t i : left_before) {
    if (!taken_before.count(i)) pairs.emplace_back(i, kAbsent);
  }
  for (std::size_t j : left_after) {
    if (!taken_after.count(j)) pairs.emplace_back(kAbsent, j);
  }
  return pairs;
}

SyntaxTree unit_tree(const FileSide& side, std::size_t k) {
  if (k == kAbsent) return SyntaxTree();
  const NodeId node = side.functions[k].node;
  return side.tree.graft(side.tree.type(side.tree.root()), side.tree.node(side.tree.root()).span,
                         std::span<const NodeId>(&node, 1));
}

// Root-level items that are not function definitions, and the text of every
// line outside function line ranges.
std::pair<SyntaxTree, std::string> file_scope(const FileSide& side) {
  std::set<NodeId> function_nodes;
  for (const auto& f : side.functions) function_nodes.insert(f.node);
  std::vector<NodeId> items;
  for (NodeId c : side.tree.children(side.tree.root())) {
    if (!function_nodes.count(c)) items.push_back(c);
  }
  SyntaxTree tree = side.tree.graft(side.tree.type(side.tree.root()), side.tree.node(side.tree.root()).span, items);
  std::string text;
  const auto lines = split_lines(*side.text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (!side.inside_function(i + 1)) {
      text += lines[i];
      text += '\n';
    }
  }
  return {std::move(tree), std::move(text)};
}

void group_functions(const FileDiff& fd, const GrammarRegistry& grammars, const GroupingOptions& options,
                     std::vector<ChangeGroup>& out) {
  const std::string& path = fd.path();
  const GrammarAdapter& grammar = grammars.for_path(path);
  const ChangedLines changes = walk_changes(fd, [](const ChangedLines&) {});
  const std::string file_scope_id = path + "::" + std::string(kFileScope);

  FileSide before, after;
  try {
    before = analyse_side(grammar, fd.before_text, fd.path_before.has_value(), changes.removed);
    after = analyse_side(grammar, fd.after_text, fd.path_after.has_value(), changes.added);
  } catch (const ParseError& e) {
    spdlog::warn("{}: {}; grouping the file as one line-level unit", path, e.what());
    ChangeGroup g;
    g.unit = {UnitKind::Function, file_scope_id};
    g.before_snippet = joined(changes.removed);
    g.after_snippet = joined(changes.added);
    g.encoded = encode_line_diff(texts(changes.removed), texts(changes.added));
    out.push_back(std::move(g));
    return;
  }

  const auto pairs = pair_functions(before, after, grammar, options.rename_similarity);
  std::map<std::string, std::size_t> name_count;
  auto display = [&](const std::pair<std::size_t, std::size_t>& p) -> const FunctionInfo& {
    return p.second != kAbsent ? after.functions[p.second] : before.functions[p.first];
  };
  for (const auto& p : pairs) ++name_count[display(p).name];

  std::set<std::string> used_ids;
  for (const auto& p : pairs) {
    const bool changed = (p.first != kAbsent && before.changed[p.first]) ||
                         (p.second != kAbsent && after.changed[p.second]);
    const FunctionInfo& info = display(p);
    std::string id = path + "::" + info.name;
    if (name_count[info.name] > 1) id += "/" + std::to_string(info.arity);
    // Same name and arity twice (e.g. alternative #ifdef branches).
    for (int k = 2; used_ids.count(id); ++k) {
      id = path + "::" + info.name + "/" + std::to_string(info.arity) + "#" + std::to_string(k);
    }
    used_ids.insert(id);
    if (!changed) continue;

    ChangeGroup g;
    g.unit = {UnitKind::Function, id};
    if (p.first != kAbsent) g.before_snippet = before.snippet(p.first);
    if (p.second != kAbsent) g.after_snippet = after.snippet(p.second);
    // A hunk can slide over an identical line (e.g. a closing brace) without
    // touching the unit's text.
    if (p.first != kAbsent && p.second != kAbsent && g.before_snippet == g.after_snippet) continue;
    g.script = diff_trees(unit_tree(before, p.first), unit_tree(after, p.second), options.matcher);
    g.encoded = encode_script(*g.script);
    out.push_back(std::move(g));
  }

  const bool scope_changed =
      std::any_of(changes.removed.begin(), changes.removed.end(),
                  [&](const NumberedLine& l) { return !before.inside_function(l.line_no); }) ||
      std::any_of(changes.added.begin(), changes.added.end(),
                  [&](const NumberedLine& l) { return !after.inside_function(l.line_no); });
  if (scope_changed) {
    auto [tree_before, text_before] = file_scope(before);
    auto [tree_after, text_after] = file_scope(after);
    if (text_before == text_after) return;
    ChangeGroup g;
    g.unit = {UnitKind::Function, file_scope_id};
    g.before_snippet = std::move(text_before);
    g.after_snippet = std::move(text_after);
    g.script = diff_trees(tree_before, tree_after, options.matcher);
    g.encoded = encode_script(*g.script);
    out.push_back(std::move(g));
  }
}

}  // namespace

std::vector<ChangeGroup> group_changes(const std::vector<FileDiff>& patch_set, UnitKind kind,
                                       const GrammarRegistry& grammars, const GroupingOptions& options) {
  std::vector<ChangeGroup> out;
  for (const auto& fd : merge_patch_set(patch_set)) {
    if (fd.binary) continue;
    if (kind == UnitKind::Line) {
      group_lines(fd, out);
    } else {
      group_functions(fd, grammars, options, out);
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ChangeGroup& a, const ChangeGroup& b) { return a.unit.id < b.unit.id; });
  return out;
}

}  // namespace patch_triage
