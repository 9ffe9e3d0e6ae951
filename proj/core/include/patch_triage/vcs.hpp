#pragma once

#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "patch_triage/diff.hpp"
#include "patch_triage/vulnerability.hpp"

namespace patch_triage {

/// Where patches come from. Implementations must tolerate concurrent fetch
/// calls for distinct records.
class PatchSource {
 public:
  virtual ~PatchSource() = default;
  /// File diffs of every hash of `record`, concatenated in hash order.
  /// Binary files are dropped with a warning.
  virtual std::vector<FileDiff> fetch(const VulnerabilityRecord& record) const = 0;
};

/// Reads commits with the `git` executable. Local repository paths are used
/// in place; URLs are cloned (bare) once into the cache directory.
class GitAdapter final : public PatchSource {
 public:
  explicit GitAdapter(std::filesystem::path cache_dir = default_cache_dir());

  std::vector<FileDiff> fetch(const VulnerabilityRecord& record) const override;

  /// Diff of one commit against its first parent (or the empty tree for a
  /// root commit), with full before/after file texts. Throws RepoUnavailable
  /// or UnknownCommit.
  std::vector<FileDiff> commit_diff(const std::string& repo, const std::string& hash) const;

  /// $PATCH_TRIAGE_CACHE, else ~/.cache/patch_triage.
  static std::filesystem::path default_cache_dir();

 private:
  std::filesystem::path resolve_repo(const std::string& repo) const;

  std::filesystem::path cache_dir_;
  mutable std::mutex clone_mutex_;
};

/// Reads `<dir>/<vuln_id>.diff`. File texts come from
/// `<dir>/before/<vuln_id>/<path>` (falling back to `<dir>/before/<path>`) and
/// likewise `after/`; a side that is missing is reconstructed by applying the
/// hunks to the other side.
class DiffDirAdapter final : public PatchSource {
 public:
  explicit DiffDirAdapter(std::filesystem::path dir);
  std::vector<FileDiff> fetch(const VulnerabilityRecord& record) const override;

 private:
  std::filesystem::path dir_;
};

/// Retrieves the patch set of `record`: the per-hash diffs, concatenated.
std::vector<FileDiff> fetch_patch(const VulnerabilityRecord& record, const PatchSource& source);

}  // namespace patch_triage
