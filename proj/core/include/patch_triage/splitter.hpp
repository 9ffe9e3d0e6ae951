#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "patch_triage/classifier.hpp"

namespace patch_triage {

enum class Split { Train, Val, Test };
inline constexpr std::array<Split, 3> kAllSplits{Split::Train, Split::Val, Split::Test};

std::string_view to_string(Split split);
Split split_from_string(std::string_view text);

struct SplitConfig {
  /// Train, validation, test. Each >= 0, summing to 1 within 1e-9.
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
  /// Down-sample training non-vulnerable samples to the number of training
  /// vulnerabilities.
  bool balance = false;

  /// Throws RatioInvalid.
  void validate() const;
};

struct VulnSample {
  std::string vuln_id;
  std::vector<std::string> unit_ids;
  std::optional<Label> label;
};

struct NonVulnSample {
  std::string sample_id;
  /// Samples sharing a group id always land in the same split.
  std::optional<std::string> group;
};

struct SplitAssignment {
  /// vuln_id or non-vulnerable sample id -> split.
  std::map<std::string, Split, std::less<>> entries;
  /// Unit id -> owning vuln_id, for resolve_split.
  std::map<std::string, std::string, std::less<>> unit_owner;
  /// Non-vulnerable samples removed from training by balancing, sorted.
  std::vector<std::string> dropped;
};

/// Largest-remainder apportionment of `n` items; ties go to the earlier
/// split. Each count is within 1 of ratio · n.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& ratios);

/// Uniform integer in [0, bound) by rejection sampling, identical on every
/// platform for a given engine state.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);

/// Sorts then Fisher-Yates shuffles `items` with uniform_below.
void seeded_shuffle(std::vector<std::string>& items, std::mt19937_64& rng);

/// Whole vulnerabilities are shuffled and apportioned; non-vulnerable
/// samples (or their groups) are apportioned independently from the same
/// random stream. Throws EmptyCorpus when both inputs are empty,
/// RatioInvalid on bad ratios, and Error on duplicate ids.
SplitAssignment assign_splits(const std::vector<VulnSample>& vulns, const std::vector<NonVulnSample>& non_vuln,
                              const SplitConfig& config);

/// Split of a vuln_id, a unit of a vulnerability, or a non-vulnerable sample.
std::optional<Split> resolve_split(const SplitAssignment& assignment, std::string_view id);

struct SplitViolation {
  std::string vuln_id;
  std::vector<Split> splits_touched;
  std::map<Split, std::size_t> units_per_split;
};

struct SplitAudit {
  std::vector<SplitViolation> violations;
  /// Units of some vulnerability that the assignment does not mention.
  std::vector<std::string> uncovered_units;
  std::size_t mbu_total = 0;
  std::size_t mbu_violated = 0;
  /// 100 · mbu_violated / mbu_total; absent without MBU vulnerabilities.
  std::optional<double> mbu_violation_pct;
};

/// Audits a unit-level assignment: one violation per vulnerability whose
/// units fall in two or more splits, ordered by vuln_id.
SplitAudit verify_splits(const std::map<std::string, Split, std::less<>>& unit_assignment,
                         const std::vector<VulnSample>& vulns);
SplitAudit verify_splits(const SplitAssignment& assignment, const std::vector<VulnSample>& vulns);

}  // namespace patch_triage
