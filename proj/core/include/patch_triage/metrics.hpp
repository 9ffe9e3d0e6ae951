#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "patch_triage/classifier.hpp"

namespace patch_triage {

struct PredictionRecord {
  std::string unit_id;
  /// Present only for vulnerable units.
  std::optional<std::string> vuln_id;
  bool true_label = false;
  bool predicted_label = false;
  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

enum class CountMode { Base, Adjusted };

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  CountMode mode = CountMode::Base;

  ConfusionCounts& operator+=(const ConfusionCounts& other) {
    tp += other.tp;
    fp += other.fp;
    fn += other.fn;
    tn += other.tn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Unit-level counts. Throws DuplicateUnitId, and Error when a record has a
/// vuln_id but is labelled non-vulnerable.
ConfusionCounts confusion_base(const std::vector<PredictionRecord>& predictions);

/// Vulnerability-level tp/fn: a vulnerability is a true positive only when
/// every one of its units is predicted vulnerable. fp and tn are the unit
/// counts of confusion_base. A vulnerable record without vuln_id is its own
/// vulnerability. When `known_vulns` is given, any other vuln_id throws
/// UnknownVulnId.
ConfusionCounts confusion_adjusted(const std::vector<PredictionRecord>& predictions,
                                   const std::set<std::string, std::less<>>* known_vulns = nullptr);

/// Absent when the denominator is zero.
std::optional<double> tpr(const ConfusionCounts& c);
std::optional<double> precision(const ConfusionCounts& c);
/// Absent when any of the four marginal sums is zero.
std::optional<double> mcc(const ConfusionCounts& c);

enum class Subgroup { IBU, MBU };

/// Adjusted TPR over vulnerabilities of one subgroup; the IBU subgroup
/// includes repeated-IBU vulnerabilities. Vulnerable records without a
/// vuln_id count as IBU. Throws UnclassifiedVuln.
std::optional<double> subgroup_tpr(const std::vector<PredictionRecord>& predictions,
                                   const std::map<std::string, Label, std::less<>>& labels, Subgroup group);

struct RateSet {
  std::optional<double> tpr;
  std::optional<double> precision;
  std::optional<double> mcc;
};

struct MetricsReport {
  RateSet base;
  RateSet adjusted;
  std::optional<double> tpr_ibu;
  std::optional<double> tpr_mbu;
  ConfusionCounts base_counts;
  ConfusionCounts adjusted_counts;
};

/// Full report. Subgroup rates are computed only when `labels` is given.
MetricsReport score_predictions(const std::vector<PredictionRecord>& predictions,
                                const std::map<std::string, Label, std::less<>>* labels = nullptr);

struct DatasetStats {
  std::size_t n_vulns = 0;
  std::size_t n_units = 0;
  std::size_t n_ibu = 0;
  std::size_t n_repeated_ibu = 0;
  std::size_t n_mbu = 0;
  std::size_t n_mbu_units = 0;
  /// Units per vulnerability -> number of vulnerabilities.
  std::map<std::size_t, std::size_t> units_histogram;
  /// Percentages in [0, 100]; absent for an empty input.
  std::optional<double> pct_mbu;
  std::optional<double> pct_non_mbu;
  std::optional<double> pct_mbu_units;
};

DatasetStats dataset_stats(const std::vector<ClassificationResult>& classifications);

/// Margin-of-error sample size: n0 = z²·p(1-p)/margin², with the
/// finite-population correction n0 / (1 + (n0 - 1)/N) when N is given,
/// rounded up. Throws InvalidParameter unless z > 0, 0 < margin < 1,
/// 0 < p < 1 and N > 0.
std::size_t sample_size(double z, double margin, double p, std::optional<std::size_t> population = std::nullopt);

}  // namespace patch_triage
