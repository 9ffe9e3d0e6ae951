#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "patch_triage/syntax_tree.hpp"
#include "patch_triage/tree_matcher.hpp"

namespace patch_triage {

enum class ActionKind { Insert, Delete, Update, Move };

std::string_view to_string(ActionKind kind);
ActionKind action_kind_from_string(std::string_view text);

/// Identifies a node of the working tree an edit script operates on. Ids
/// below the before-tree size are before-tree nodes; larger ids are nodes
/// created by earlier Insert actions, numbered in emission order.
/// kScriptRoot is a virtual parent above the before root.
using ScriptNodeId = std::int64_t;
inline constexpr ScriptNodeId kScriptRoot = -1;

struct EditAction {
  ActionKind kind = ActionKind::Insert;
  std::string node_type;
  /// Insert: label of the new node. Update: the new label. Delete/Move:
  /// label of the affected node.
  std::optional<std::string> label;
  /// Update only: the label being replaced.
  std::optional<std::string> old_label;
  /// Insert/Move only.
  std::optional<std::string> parent_type;
  /// Insert/Move only: index in the parent's child list. For Move the node is
  /// detached before the index is applied.
  std::size_t position = 0;

  ScriptNodeId node = 0;
  ScriptNodeId parent = kScriptRoot;

  friend bool operator==(const EditAction&, const EditAction&) = default;
};

struct EditScript {
  std::vector<EditAction> actions;

  bool empty() const { return actions.empty(); }
  std::size_t size() const { return actions.size(); }
  friend bool operator==(const EditScript&, const EditScript&) = default;
};

using TokenSequence = std::vector<std::string>;

/// Chawathe-style edit script turning `before` into `after` under `mapping`.
/// Inserts are emitted parent-first (breadth-first over `after`), deletes
/// leaf-first (postorder). Throws InconsistentMapping when the mapping is
/// not injective or pairs nodes of different types.
EditScript edit_script(const SyntaxTree& before, const SyntaxTree& after, const TreeMapping& mapping);

/// match_trees followed by edit_script.
EditScript diff_trees(const SyntaxTree& before, const SyntaxTree& after,
                      const MatcherOptions& options = {});

/// One token per action: `INS:type[:label]`, `DEL:type[:label]`,
/// `UPD:type:new_label`, `MOV:type:parent_type`.
TokenSequence encode_script(const EditScript& script);

/// Token encoding for line base units: `DEL:<lexeme>` for every
/// whitespace-separated lexeme of the removed lines, then `ADD:<lexeme>` for
/// the added lines.
TokenSequence encode_line_diff(const std::vector<std::string>& removed,
                               const std::vector<std::string>& added);

}  // namespace patch_triage
