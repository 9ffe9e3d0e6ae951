#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "patch_triage/change_group.hpp"
#include "patch_triage/vulnerability.hpp"

namespace patch_triage {

enum class Label { IBU, RepeatedIBU, MBU };
enum class Method { Similarity, Clustering };
/// Dice: 2·LCS / (|a| + |b|). Max: LCS / max(|a|, |b|).
enum class SimNorm { Dice, Max };

std::string_view to_string(Label label);
std::string_view to_string(Method method);
std::string_view to_string(SimNorm norm);
Label label_from_string(std::string_view text);
Method method_from_string(std::string_view text);
SimNorm sim_norm_from_string(std::string_view text);

struct ClassifierConfig {
  Method method = Method::Similarity;
  /// Inclusive: a minimum similarity equal to the threshold is repeated-IBU.
  /// Values above 1 are accepted and make every compound patch MBU.
  double threshold = 0.70;
  double eps = 0.30;
  std::size_t min_pts = 2;
  SimNorm norm = SimNorm::Dice;

  /// Throws InvalidParameter when a field is out of range.
  void validate() const;
};

/// Tolerance added to eps in the DBSCAN neighbourhood test so that
/// 1 - 0.7 counts as within 0.3.
inline constexpr double kEpsSlack = 1e-9;

using UnitPair = std::pair<std::string, std::string>;

struct MinSimilarity {
  double value = 1.0;
  /// Lexicographically smallest (smaller id, larger id) pair attaining it.
  UnitPair pair;
};

struct Clustering {
  /// Each cluster sorted; clusters ordered by their smallest id.
  std::vector<std::vector<std::string>> clusters;
  std::vector<std::string> noise;
  friend bool operator==(const Clustering&, const Clustering&) = default;
};

struct ClassificationResult {
  std::string vuln_id;
  Label label = Label::IBU;
  std::size_t n_units = 0;
  Method method = Method::Similarity;
  std::optional<double> min_similarity;
  std::optional<UnitPair> min_pair;
  std::optional<Clustering> clustering;
  /// Sorted distinct unit ids.
  std::vector<std::string> units;
};

/// Similarity of two token sequences; two empty sequences score 1.
double lcs_similarity(const TokenSequence& a, const TokenSequence& b, SimNorm norm = SimNorm::Dice);

/// Throws TooFewGroups when fewer than two groups are given.
MinSimilarity min_pairwise_similarity(const std::vector<ChangeGroup>& groups, SimNorm norm = SimNorm::Dice);

ClassificationResult classify_similarity(const std::vector<ChangeGroup>& groups, double threshold,
                                         SimNorm norm = SimNorm::Dice);

/// DBSCAN over an explicit symmetric distance matrix (row-major, n × n).
/// A point is core when at least `min_pts` points, itself included, lie
/// within eps. Clusters are connected core points plus border points; a
/// border point next to several clusters joins the cluster of its
/// lexicographically smallest core neighbour. Ids must be distinct.
Clustering dbscan(const std::vector<std::string>& ids, const std::vector<double>& distances, double eps,
                  std::size_t min_pts);

/// dbscan with distance 1 - lcs_similarity of the encoded scripts.
Clustering dbscan_cluster(const std::vector<ChangeGroup>& groups, double eps, std::size_t min_pts,
                          SimNorm norm = SimNorm::Dice);

/// Repeated-IBU only when every group lands in a single cluster and nothing
/// is noise.
ClassificationResult classify_clustering(const std::vector<ChangeGroup>& groups, double eps,
                                         std::size_t min_pts, SimNorm norm = SimNorm::Dice);

ClassificationResult classify(const std::vector<ChangeGroup>& groups, const ClassifierConfig& config);

/// One result per record, ordered by vuln_id. Throws MissingGroups when a
/// record has no (or empty) groups; a declared_unit_count that disagrees with
/// the grouped count is logged as a warning.
std::vector<ClassificationResult> classify_corpus(
    const std::vector<VulnerabilityRecord>& records,
    const std::map<std::string, std::vector<ChangeGroup>, std::less<>>& groups_by_vuln,
    const ClassifierConfig& config, std::size_t jobs = 1);

}  // namespace patch_triage
