#include "patch_triage/metrics.hpp"

#include <cmath>

#include "patch_triage/error.hpp"

namespace patch_triage {

namespace {

void check_record(const PredictionRecord& r) {
  if (r.vuln_id && !r.true_label) {
    throw Error("unit '" + r.unit_id + "' has a vuln_id but is labelled non-vulnerable");
  }
}

// vuln key -> (units, units predicted vulnerable)
using VulnOutcomes = std::map<std::string, std::pair<std::size_t, std::size_t>>;

VulnOutcomes vuln_outcomes(const std::vector<PredictionRecord>& predictions) {
  VulnOutcomes out;
  for (const auto& r : predictions) {
    if (!r.true_label) continue;
    // Singleton keys are prefixed so they never merge with a named vulnerability.
    auto& [units, hit] = out[r.vuln_id ? "v:" + *r.vuln_id : "u:" + r.unit_id];
    ++units;
    hit += r.predicted_label ? 1 : 0;
  }
  return out;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ConfusionCounts confusion_base(const std::vector<PredictionRecord>& predictions) {
  ConfusionCounts c;
  std::set<std::string_view> seen;
  for (const auto& r : predictions) {
    check_record(r);
    if (!seen.insert(r.unit_id).second) throw DuplicateUnitId(r.unit_id);
    if (r.true_label) {
      ++(r.predicted_label ? c.tp : c.fn);
    } else {
      ++(r.predicted_label ? c.fp : c.tn);
    }
  }
  return c;
}

ConfusionCounts confusion_adjusted(const std::vector<PredictionRecord>& predictions,
                                   const std::set<std::string, std::less<>>* known_vulns) {
  ConfusionCounts c = confusion_base(predictions);
  c.mode = CountMode::Adjusted;
  if (known_vulns) {
    for (const auto& r : predictions) {
      if (r.vuln_id && !known_vulns->count(*r.vuln_id)) throw UnknownVulnId(*r.vuln_id);
    }
  }
  c.tp = c.fn = 0;
  for (const auto& [key, outcome] : vuln_outcomes(predictions)) {
    ++(outcome.second == outcome.first ? c.tp : c.fn);
  }
  return c;
}

std::optional<double> tpr(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fn); }

std::optional<double> precision(const ConfusionCounts& c) { return ratio(c.tp, c.tp + c.fp); }

std::optional<double> mcc(const ConfusionCounts& c) {
  const auto tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
  const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (denom == 0) return std::nullopt;
  return (tp * tn - fp * fn) / std::sqrt(denom);
}

std::optional<double> subgroup_tpr(const std::vector<PredictionRecord>& predictions,
                                   const std::map<std::string, Label, std::less<>>& labels, Subgroup group) {
  std::size_t hit = 0, total = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> per_vuln;
  for (const auto& r : predictions) {
    check_record(r);
    if (!r.true_label) continue;
    bool is_mbu = false;
    if (r.vuln_id) {
      const auto it = labels.find(*r.vuln_id);
      if (it == labels.end()) throw UnclassifiedVuln(*r.vuln_id);
      is_mbu = it->second == Label::MBU;
    }
    if (is_mbu != (group == Subgroup::MBU)) continue;
    auto& [units, hits] = per_vuln[r.vuln_id ? "v:" + *r.vuln_id : "u:" + r.unit_id];
    ++units;
    hits += r.predicted_label ? 1 : 0;
  }
  for (const auto& [key, outcome] : per_vuln) {
    ++total;
    hit += outcome.second == outcome.first ? 1 : 0;
  }
  return ratio(hit, total);
}

MetricsReport score_predictions(const std::vector<PredictionRecord>& predictions,
                                const std::map<std::string, Label, std::less<>>* labels) {
  MetricsReport r;
  r.base_counts = confusion_base(predictions);
  if (labels) {
    std::set<std::string, std::less<>> known;
    for (const auto& [id, label] : *labels) known.insert(id);
    r.adjusted_counts = confusion_adjusted(predictions, &known);
    r.tpr_ibu = subgroup_tpr(predictions, *labels, Subgroup::IBU);
    r.tpr_mbu = subgroup_tpr(predictions, *labels, Subgroup::MBU);
  } else {
    r.adjusted_counts = confusion_adjusted(predictions);
  }
  r.base = {tpr(r.base_counts), precision(r.base_counts), mcc(r.base_counts)};
  r.adjusted = {tpr(r.adjusted_counts), precision(r.adjusted_counts), mcc(r.adjusted_counts)};
  return r;
}

DatasetStats dataset_stats(const std::vector<ClassificationResult>& classifications) {
  DatasetStats s;
  for (const auto& c : classifications) {
    ++s.n_vulns;
    s.n_units += c.n_units;
    ++s.units_histogram[c.n_units];
    switch (c.label) {
      case Label::IBU: ++s.n_ibu; break;
      case Label::RepeatedIBU: ++s.n_repeated_ibu; break;
      case Label::MBU:
        ++s.n_mbu;
        s.n_mbu_units += c.n_units;
        break;
    }
  }
  if (s.n_vulns > 0) {
    s.pct_mbu = 100.0 * static_cast<double>(s.n_mbu) / static_cast<double>(s.n_vulns);
    s.pct_non_mbu = 100.0 * static_cast<double>(s.n_vulns - s.n_mbu) / static_cast<double>(s.n_vulns);
  }
  if (s.n_units > 0) s.pct_mbu_units = 100.0 * static_cast<double>(s.n_mbu_units) / static_cast<double>(s.n_units);
  return s;
}

std::size_t sample_size(double z, double margin, double p, std::optional<std::size_t> population) {
  if (!(z > 0) || !std::isfinite(z)) throw InvalidParameter("z must be positive");
  if (!(margin > 0 && margin < 1)) throw InvalidParameter("margin must lie in (0, 1)");
  if (!(p > 0 && p < 1)) throw InvalidParameter("p must lie in (0, 1)");
  if (population && *population == 0) throw InvalidParameter("population must be positive");
  double n = z * z * p * (1 - p) / (margin * margin);
  if (population) n = n / (1 + (n - 1) / static_cast<double>(*population));
  // Absorb rounding noise so an exact integer is not bumped up by one.
  return static_cast<std::size_t>(std::ceil(n - 1e-9));
}

}  // namespace patch_triage
