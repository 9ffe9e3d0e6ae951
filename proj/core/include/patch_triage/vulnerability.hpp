#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace patch_triage {

struct VulnerabilityRecord {
  std::string vuln_id;
  /// URL or local path; may be empty when patches come from a diff directory.
  std::string repo;
  /// Non-empty; each entry is a hex commit id.
  std::vector<std::string> patch_hashes;
  std::optional<std::string> cve_id;
  std::optional<std::size_t> declared_unit_count;

  friend bool operator==(const VulnerabilityRecord&, const VulnerabilityRecord&) = default;
};

struct MetadataOptions {
  /// When false, `repo` may be missing (diff-directory ingestion).
  bool require_repo = true;
};

/// Reads JSONL metadata, one record per non-blank line, in file order.
/// Throws MalformedRecord (1-based line number) on invalid JSON, missing or
/// mistyped fields, or non-hex hashes, and DuplicateVulnId on a repeated id.
std::vector<VulnerabilityRecord> parse_metadata(std::istream& in, const MetadataOptions& options = {});
std::vector<VulnerabilityRecord> load_metadata(const std::filesystem::path& path,
                                               const MetadataOptions& options = {});

bool is_hex_hash(const std::string& text);

}  // namespace patch_triage
