#include "patch_triage/diff.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <span>

#include "patch_triage/error.hpp"
#include "patch_triage/sequence.hpp"

namespace patch_triage {

std::vector<std::string> Hunk::removed_lines() const {
  std::vector<std::string> out;
  for (const auto& l : lines) {
    if (l.op == LineOp::Removed) out.push_back(l.text);
  }
  return out;
}

std::vector<std::string> Hunk::added_lines() const {
  std::vector<std::string> out;
  for (const auto& l : lines) {
    if (l.op == LineOp::Added) out.push_back(l.text);
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      break;
    }
    out.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

namespace {

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

std::optional<std::string> header_path(std::string_view raw) {
  if (auto tab = raw.find('\t'); tab != std::string_view::npos) raw = raw.substr(0, tab);
  while (!raw.empty() && (raw.back() == ' ' || raw.back() == '\r')) raw.remove_suffix(1);
  if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') raw = raw.substr(1, raw.size() - 2);
  if (raw == "/dev/null") return std::nullopt;
  if (starts_with(raw, "a/") || starts_with(raw, "b/")) raw.remove_prefix(2);
  return std::string(raw);
}

bool read_number(std::string_view& s, std::size_t& out) {
  const auto* begin = s.data();
  const auto [ptr, ec] = std::from_chars(begin, begin + s.size(), out);
  if (ec != std::errc() || ptr == begin) return false;
  s.remove_prefix(static_cast<std::size_t>(ptr - begin));
  return true;
}

bool read_range(std::string_view& s, char sign, std::size_t& start, std::size_t& len) {
  if (s.empty() || s.front() != sign) return false;
  s.remove_prefix(1);
  if (!read_number(s, start)) return false;
  len = 1;
  if (!s.empty() && s.front() == ',') {
    s.remove_prefix(1);
    if (!read_number(s, len)) return false;
  }
  return true;
}

Hunk parse_hunk_header(std::string_view line, std::size_t line_no) {
  Hunk h;
  std::string_view s = line.substr(2);
  auto expect_space = [&] {
    if (s.empty() || s.front() != ' ') throw DiffSyntaxError(line_no, "malformed hunk header");
    s.remove_prefix(1);
  };
  expect_space();
  if (!read_range(s, '-', h.before_start, h.before_len)) throw DiffSyntaxError(line_no, "malformed hunk header");
  expect_space();
  if (!read_range(s, '+', h.after_start, h.after_len)) throw DiffSyntaxError(line_no, "malformed hunk header");
  expect_space();
  if (!starts_with(s, "@@")) throw DiffSyntaxError(line_no, "malformed hunk header");
  return h;
}

// First before-side line index (0-based) covered by the hunk, and one past
// the last.
std::pair<std::size_t, std::size_t> before_extent(const Hunk& h) {
  const std::size_t begin = h.before_len == 0 ? h.before_start : h.before_start - 1;
  return {begin, begin + h.before_len};
}

}  // namespace

std::vector<FileDiff> parse_unified_diff(std::string_view text) {
  const auto lines = split_lines(text);
  std::vector<FileDiff> out;
  bool git_header_open = false;
  std::size_t i = 0;
  while (i < lines.size()) {
    const std::string& line = lines[i];
    if (starts_with(line, "diff --git ")) {
      FileDiff fd;
      const std::string_view rest = std::string_view(line).substr(11);
      if (const auto sep = rest.rfind(" b/"); sep != std::string_view::npos) {
        fd.path_before = header_path(rest.substr(0, sep));
        fd.path_after = header_path(rest.substr(sep + 1));
      }
      out.push_back(std::move(fd));
      git_header_open = true;
      ++i;
      continue;
    }
    if (starts_with(line, "--- ") && i + 1 < lines.size() && starts_with(lines[i + 1], "+++ ")) {
      if (!git_header_open) out.emplace_back();
      out.back().path_before = header_path(std::string_view(line).substr(4));
      out.back().path_after = header_path(std::string_view(lines[i + 1]).substr(4));
      if (!out.back().path_before && !out.back().path_after) {
        throw DiffSyntaxError(i + 1, "both file paths are /dev/null");
      }
      git_header_open = false;
      i += 2;
      continue;
    }
    if (starts_with(line, "@@")) {
      if (out.empty() || git_header_open) throw DiffSyntaxError(i + 1, "hunk outside a file section");
      Hunk h = parse_hunk_header(line, i + 1);
      std::size_t left_before = h.before_len, left_after = h.after_len;
      ++i;
      while (left_before > 0 || left_after > 0) {
        if (i >= lines.size()) throw DiffSyntaxError(i + 1, "truncated hunk");
        const std::string& body = lines[i];
        if (starts_with(body, "\\")) {
          ++i;
          continue;
        }
        const char op = body.empty() ? ' ' : body.front();
        std::string content = body.empty() ? std::string() : body.substr(1);
        if (op == ' ') {
          if (left_before == 0 || left_after == 0) throw DiffSyntaxError(i + 1, "hunk longer than its header");
          --left_before;
          --left_after;
          h.lines.push_back({LineOp::Context, std::move(content)});
        } else if (op == '-') {
          if (left_before == 0) throw DiffSyntaxError(i + 1, "hunk longer than its header");
          --left_before;
          h.lines.push_back({LineOp::Removed, std::move(content)});
        } else if (op == '+') {
          if (left_after == 0) throw DiffSyntaxError(i + 1, "hunk longer than its header");
          --left_after;
          h.lines.push_back({LineOp::Added, std::move(content)});
        } else {
          throw DiffSyntaxError(i + 1, "unexpected line in hunk body");
        }
        ++i;
      }
      if (i < lines.size() && starts_with(lines[i], "\\")) ++i;
      auto& hunks = out.back().hunks;
      if (!hunks.empty() && before_extent(h).first < before_extent(hunks.back()).second) {
        throw DiffSyntaxError(i, "hunks overlap or are out of order");
      }
      hunks.push_back(std::move(h));
      continue;
    }
    if (!out.empty() && git_header_open) {
      if (starts_with(line, "Binary files ") || starts_with(line, "GIT binary patch")) {
        out.back().binary = true;
      } else if (starts_with(line, "new file mode")) {
        out.back().path_before.reset();
      } else if (starts_with(line, "deleted file mode")) {
        out.back().path_after.reset();
      }
    }
    ++i;
  }
  // A git section without ---/+++ and without a binary marker is a pure mode
  // change or rename; it carries no text change.
  std::erase_if(out, [](const FileDiff& fd) {
    return (!fd.path_before && !fd.path_after) || (fd.hunks.empty() && !fd.binary && fd.path_before == fd.path_after);
  });
  return out;
}

std::string render_unified_diff(const std::vector<FileDiff>& diffs) {
  std::string out;
  for (const auto& fd : diffs) {
    const std::string before = fd.path_before ? "a/" + *fd.path_before : "/dev/null";
    const std::string after = fd.path_after ? "b/" + *fd.path_after : "/dev/null";
    if (fd.binary) {
      out += "diff --git a/" + fd.path() + " b/" + fd.path() + "\n";
      out += "Binary files " + before + " and " + after + " differ\n";
      continue;
    }
    out += "--- " + before + "\n+++ " + after + "\n";
    for (const auto& h : fd.hunks) {
      out += "@@ -" + std::to_string(h.before_start) + "," + std::to_string(h.before_len) + " +" +
             std::to_string(h.after_start) + "," + std::to_string(h.after_len) + " @@\n";
      for (const auto& l : h.lines) {
        out += static_cast<char>(l.op);
        out += l.text;
        out += '\n';
      }
    }
  }
  return out;
}

std::string apply_hunks(std::string_view text, const std::vector<Hunk>& hunks, bool reverse) {
  const auto src = split_lines(text);
  const LineOp consumed = reverse ? LineOp::Added : LineOp::Removed;
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (const auto& h : hunks) {
    const std::size_t start = reverse ? h.after_start : h.before_start;
    const std::size_t len = reverse ? h.after_len : h.before_len;
    const std::size_t begin = len == 0 ? start : start - 1;
    if (begin < pos || begin > src.size()) throw Error("hunk does not fit the file text");
    out.insert(out.end(), src.begin() + static_cast<std::ptrdiff_t>(pos),
               src.begin() + static_cast<std::ptrdiff_t>(begin));
    pos = begin;
    for (const auto& l : h.lines) {
      if (l.op == LineOp::Context || l.op == consumed) {
        if (pos >= src.size() || src[pos] != l.text) {
          throw Error("hunk line " + std::to_string(pos + 1) + " does not match the file text");
        }
        if (l.op == LineOp::Context) out.push_back(l.text);
        ++pos;
      } else {
        out.push_back(l.text);
      }
    }
  }
  out.insert(out.end(), src.begin() + static_cast<std::ptrdiff_t>(pos), src.end());
  return join_lines(out);
}

std::vector<Hunk> diff_texts(std::string_view before, std::string_view after, std::size_t context) {
  const auto a = split_lines(before);
  const auto b = split_lines(after);

  std::size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) ++prefix;
  std::size_t suffix = 0;
  while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
    ++suffix;
  }
  const std::span<const std::string> mid_a(a.data() + prefix, a.size() - prefix - suffix);
  const std::span<const std::string> mid_b(b.data() + prefix, b.size() - prefix - suffix);

  // Quadratic table only for modest middles; otherwise the whole middle is
  // one replaced block.
  constexpr std::size_t kMaxTable = 16u << 20;
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  if (!mid_a.empty() && !mid_b.empty() && mid_a.size() * mid_b.size() <= kMaxTable) {
    matches = lcs_alignment(mid_a, mid_b, std::equal_to<>{});
  }

  struct Entry {
    LineOp op;
    std::size_t a_index;  // lines of `a` consumed before this entry
    std::size_t b_index;
    const std::string* text;
  };
  std::vector<Entry> entries;
  std::size_t i = 0, j = 0;
  auto emit_until = [&](std::size_t ai, std::size_t bj) {
    for (; i < ai; ++i) entries.push_back({LineOp::Removed, i, j, &a[i]});
    for (; j < bj; ++j) entries.push_back({LineOp::Added, i, j, &b[j]});
  };
  auto emit_common = [&] {
    entries.push_back({LineOp::Context, i, j, &a[i]});
    ++i;
    ++j;
  };
  while (i < prefix) emit_common();
  for (const auto& [mi, mj] : matches) {
    emit_until(prefix + mi, prefix + mj);
    emit_common();
  }
  emit_until(a.size() - suffix, b.size() - suffix);
  while (i < a.size()) emit_common();

  std::vector<std::size_t> changes;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (entries[k].op != LineOp::Context) changes.push_back(k);
  }
  std::vector<Hunk> hunks;
  std::size_t c = 0;
  while (c < changes.size()) {
    std::size_t last = c;
    while (last + 1 < changes.size() && changes[last + 1] - changes[last] <= 2 * context + 1) ++last;
    const std::size_t first_entry = changes[c] >= context ? changes[c] - context : 0;
    const std::size_t end_entry = std::min(entries.size(), changes[last] + context + 1);
    Hunk h;
    for (std::size_t k = first_entry; k < end_entry; ++k) {
      const Entry& e = entries[k];
      h.lines.push_back({e.op, *e.text});
      if (e.op != LineOp::Added) ++h.before_len;
      if (e.op != LineOp::Removed) ++h.after_len;
    }
    const Entry& head = entries[first_entry];
    h.before_start = h.before_len == 0 ? head.a_index : head.a_index + 1;
    h.after_start = h.after_len == 0 ? head.b_index : head.b_index + 1;
    hunks.push_back(std::move(h));
    c = last + 1;
  }
  return hunks;
}

std::vector<FileDiff> merge_patch_set(const std::vector<FileDiff>& diffs) {
  std::vector<FileDiff> out;
  std::vector<bool> merged;
  std::map<std::string, std::size_t, std::less<>> by_path;
  for (const auto& d : diffs) {
    if (d.binary) {
      out.push_back(d);
      merged.push_back(false);
      continue;
    }
    const std::string& lookup = d.path_before ? *d.path_before : *d.path_after;
    if (auto it = by_path.find(lookup); it != by_path.end()) {
      const std::size_t idx = it->second;
      by_path.erase(it);
      FileDiff& target = out[idx];
      target.path_after = d.path_after;
      target.after_text = d.after_text;
      merged[idx] = true;
      by_path[target.path()] = idx;
      continue;
    }
    by_path[d.path()] = out.size();
    out.push_back(d);
    merged.push_back(false);
  }
  std::vector<FileDiff> result;
  for (std::size_t k = 0; k < out.size(); ++k) {
    FileDiff& fd = out[k];
    if (merged[k]) {
      fd.hunks = diff_texts(fd.before_text, fd.after_text);
      if (fd.hunks.empty() && fd.path_before == fd.path_after) continue;
    }
    result.push_back(std::move(fd));
  }
  return result;
}

}  // namespace patch_triage
