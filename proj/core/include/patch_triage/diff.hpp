#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace patch_triage {

enum class LineOp : char { Context = ' ', Removed = '-', Added = '+' };

struct DiffLine {
  LineOp op = LineOp::Context;
  std::string text;
  friend bool operator==(const DiffLine&, const DiffLine&) = default;
};

/// One `@@` section. Coordinates are 1-based; `before_len` counts context and
/// removed lines, `after_len` counts context and added lines. A zero length
/// start refers to the line after which the (empty) range sits.
struct Hunk {
  std::size_t before_start = 0;
  std::size_t before_len = 0;
  std::size_t after_start = 0;
  std::size_t after_len = 0;
  std::vector<DiffLine> lines;

  std::vector<std::string> removed_lines() const;
  std::vector<std::string> added_lines() const;
  friend bool operator==(const Hunk&, const Hunk&) = default;
};

struct FileDiff {
  /// Absent for an added (before) or deleted (after) file.
  std::optional<std::string> path_before;
  std::optional<std::string> path_after;
  std::vector<Hunk> hunks;
  std::string before_text;
  std::string after_text;
  bool binary = false;

  /// The after path, or the before path for a deleted file.
  const std::string& path() const { return path_after ? *path_after : *path_before; }
};

/// Lines of `text` without their terminators. A final newline does not
/// produce a trailing empty line.
std::vector<std::string> split_lines(std::string_view text);
/// Inverse of split_lines for newline-terminated text.
std::string join_lines(const std::vector<std::string>& lines);

/// Parses `---`/`+++`/`@@` unified diff text; git extended headers and any
/// text outside file sections are skipped. Hunk bodies are consumed exactly
/// as far as the header counts say. Throws DiffSyntaxError with the 1-based
/// line number on malformed or truncated input.
std::vector<FileDiff> parse_unified_diff(std::string_view text);

/// Renders file sections with `a/` and `b/` path prefixes.
std::string render_unified_diff(const std::vector<FileDiff>& diffs);

/// Applies `hunks` to `text`. With `reverse` the hunks are applied from the
/// after side to recover the before text. Throws Error when a context or
/// removed line does not match.
std::string apply_hunks(std::string_view text, const std::vector<Hunk>& hunks, bool reverse = false);

/// Line diff of two texts as hunks with `context` lines of context.
std::vector<Hunk> diff_texts(std::string_view before, std::string_view after, std::size_t context = 3);

/// Collapses file diffs that touch the same file across several commits into
/// one diff from the earliest before text to the latest after text. Files
/// whose net change is empty are dropped; first-seen order is kept.
std::vector<FileDiff> merge_patch_set(const std::vector<FileDiff>& diffs);

}  // namespace patch_triage
