#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "patch_triage/diff.hpp"
#include "patch_triage/edit_script.hpp"
#include "patch_triage/grammar.hpp"

namespace patch_triage {

enum class UnitKind { Line, Function };

std::string_view to_string(UnitKind kind);
/// Accepts "line" and "function"; throws Error otherwise.
UnitKind unit_kind_from_string(std::string_view text);

/// Suffix of the per-file pseudo-unit collecting changes outside functions.
inline constexpr std::string_view kFileScope = "<file-scope>";

/// Line units are `path:<before line>` for removed (or replaced) lines and
/// `path:+<after line>` for pure additions. Function units are
/// `path::name`, with `/arity` appended when a file has several functions of
/// that name, and `path::<file-scope>` for everything outside functions.
struct BaseUnit {
  UnitKind kind = UnitKind::Function;
  std::string id;
  friend bool operator==(const BaseUnit&, const BaseUnit&) = default;
};

struct ChangeGroup {
  BaseUnit unit;
  std::string before_snippet;
  std::string after_snippet;
  /// AST edit script for function and file-scope units. Absent for line
  /// units and for files that failed to parse, whose `encoded` is a line
  /// token diff instead.
  std::optional<EditScript> script;
  TokenSequence encoded;
  friend bool operator==(const ChangeGroup&, const ChangeGroup&) = default;
};

struct GroupingOptions {
  /// Leftover before/after functions are paired as a rename when the dice
  /// similarity of their lexemes reaches this value.
  double rename_similarity = 0.6;
  MatcherOptions matcher;
};

/// Splits a patch set into per-unit change groups sorted by unit id. Diffs
/// of the same file from several commits are merged first. Throws
/// GrammarUnavailable for Function units in a file no adapter handles.
std::vector<ChangeGroup> group_changes(const std::vector<FileDiff>& patch_set, UnitKind kind,
                                       const GrammarRegistry& grammars,
                                       const GroupingOptions& options = {});

/// True when the groups span more than one distinct unit id.
bool is_compound(const std::vector<ChangeGroup>& groups);

}  // namespace patch_triage
