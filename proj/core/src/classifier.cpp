#include "patch_triage/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "patch_triage/error.hpp"
#include "patch_triage/parallel.hpp"
#include "patch_triage/sequence.hpp"

namespace patch_triage {

std::string_view to_string(Label label) {
  switch (label) {
    case Label::IBU: return "IBU";
    case Label::RepeatedIBU: return "RepeatedIBU";
    case Label::MBU: return "MBU";
  }
  return "IBU";
}

std::string_view to_string(Method method) { return method == Method::Similarity ? "similarity" : "clustering"; }
std::string_view to_string(SimNorm norm) { return norm == SimNorm::Dice ? "dice" : "max"; }

Label label_from_string(std::string_view text) {
  if (text == "IBU") return Label::IBU;
  if (text == "RepeatedIBU") return Label::RepeatedIBU;
  if (text == "MBU") return Label::MBU;
  throw Error("unknown label '" + std::string(text) + "'");
}

Method method_from_string(std::string_view text) {
  if (text == "similarity") return Method::Similarity;
  if (text == "clustering") return Method::Clustering;
  throw Error("unknown method '" + std::string(text) + "'");
}

SimNorm sim_norm_from_string(std::string_view text) {
  if (text == "dice") return SimNorm::Dice;
  if (text == "max") return SimNorm::Max;
  throw Error("unknown similarity normalization '" + std::string(text) + "'");
}

void ClassifierConfig::validate() const {
  if (!std::isfinite(threshold) || threshold < 0) throw InvalidParameter("threshold must be >= 0");
  if (!(eps >= 0 && eps <= 1)) throw InvalidParameter("eps must lie in [0, 1]");
  if (min_pts < 1) throw InvalidParameter("min_pts must be >= 1");
}

double lcs_similarity(const TokenSequence& a, const TokenSequence& b, SimNorm norm) {
  if (a.empty() && b.empty()) return 1.0;
  const auto common = static_cast<double>(lcs_length<std::string>(a, b));
  if (norm == SimNorm::Max) return common / static_cast<double>(std::max(a.size(), b.size()));
  return 2.0 * common / static_cast<double>(a.size() + b.size());
}

namespace {

std::vector<std::string> sorted_unit_ids(const std::vector<ChangeGroup>& groups) {
  std::set<std::string> ids;
  for (const auto& g : groups) ids.insert(g.unit.id);
  return {ids.begin(), ids.end()};
}

// Groups in unit-id order so results never depend on input order.
std::vector<const ChangeGroup*> by_unit_id(const std::vector<ChangeGroup>& groups) {
  std::vector<const ChangeGroup*> out;
  for (const auto& g : groups) out.push_back(&g);
  std::stable_sort(out.begin(), out.end(),
                   [](const ChangeGroup* a, const ChangeGroup* b) { return a->unit.id < b->unit.id; });
  return out;
}

}  // namespace

MinSimilarity min_pairwise_similarity(const std::vector<ChangeGroup>& groups, SimNorm norm) {
  if (groups.size() < 2) throw TooFewGroups("pairwise similarity needs at least two change groups");
  const auto sorted = by_unit_id(groups);
  MinSimilarity best;
  bool first = true;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    for (std::size_t j = i + 1; j < sorted.size(); ++j) {
      const double sim = lcs_similarity(sorted[i]->encoded, sorted[j]->encoded, norm);
      UnitPair pair{sorted[i]->unit.id, sorted[j]->unit.id};
      if (first || sim < best.value || (sim == best.value && pair < best.pair)) {
        best = {sim, std::move(pair)};
        first = false;
      }
    }
  }
  return best;
}

ClassificationResult classify_similarity(const std::vector<ChangeGroup>& groups, double threshold, SimNorm norm) {
  ClassificationResult r;
  r.method = Method::Similarity;
  r.units = sorted_unit_ids(groups);
  r.n_units = r.units.size();
  if (r.n_units <= 1) {
    r.label = Label::IBU;
    return r;
  }
  const auto min = min_pairwise_similarity(groups, norm);
  r.min_similarity = min.value;
  r.min_pair = min.pair;
  r.label = min.value >= threshold ? Label::RepeatedIBU : Label::MBU;
  return r;
}

Clustering dbscan(const std::vector<std::string>& ids, const std::vector<double>& distances, double eps,
                  std::size_t min_pts) {
  const std::size_t n = ids.size();
  if (distances.size() != n * n) throw InvalidParameter("distance matrix size does not match the point count");
  // Visit points in id order; index k of `order` is the k-th smallest id.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
  auto near = [&](std::size_t a, std::size_t b) { return a == b || distances[a * n + b] <= eps + kEpsSlack; };

  std::vector<bool> core(n, false);
  for (std::size_t p = 0; p < n; ++p) {
    std::size_t count = 0;
    for (std::size_t q = 0; q < n; ++q) count += near(p, q) ? 1 : 0;
    core[p] = count >= min_pts;
  }

  constexpr std::size_t kUnassigned = static_cast<std::size_t>(-1);
  std::vector<std::size_t> cluster_of(n, kUnassigned);
  std::size_t clusters = 0;
  for (std::size_t seed : order) {
    if (!core[seed] || cluster_of[seed] != kUnassigned) continue;
    std::vector<std::size_t> stack{seed};
    cluster_of[seed] = clusters;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      for (std::size_t q = 0; q < n; ++q) {
        if (core[q] && cluster_of[q] == kUnassigned && near(p, q)) {
          cluster_of[q] = clusters;
          stack.push_back(q);
        }
      }
    }
    ++clusters;
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (core[p]) continue;
    for (std::size_t q : order) {
      if (core[q] && near(p, q)) {
        cluster_of[p] = cluster_of[q];
        break;
      }
    }
  }

  Clustering out;
  out.clusters.resize(clusters);
  for (std::size_t p : order) {
    if (cluster_of[p] == kUnassigned) {
      out.noise.push_back(ids[p]);
    } else {
      out.clusters[cluster_of[p]].push_back(ids[p]);
    }
  }
  // Clusters were numbered by their smallest core id; a border point may
  // carry a smaller id, so order by first member explicitly.
  std::sort(out.clusters.begin(), out.clusters.end());
  return out;
}

Clustering dbscan_cluster(const std::vector<ChangeGroup>& groups, double eps, std::size_t min_pts, SimNorm norm) {
  const auto sorted = by_unit_id(groups);
  const std::size_t n = sorted.size();
  std::vector<std::string> ids;
  for (const auto* g : sorted) ids.push_back(g->unit.id);
  std::vector<double> distances(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = 1.0 - lcs_similarity(sorted[i]->encoded, sorted[j]->encoded, norm);
      distances[i * n + j] = distances[j * n + i] = d;
    }
  }
  return dbscan(ids, distances, eps, min_pts);
}

ClassificationResult classify_clustering(const std::vector<ChangeGroup>& groups, double eps, std::size_t min_pts,
                                         SimNorm norm) {
  ClassificationResult r;
  r.method = Method::Clustering;
  r.units = sorted_unit_ids(groups);
  r.n_units = r.units.size();
  if (r.n_units <= 1) {
    r.label = Label::IBU;
    return r;
  }
  r.clustering = dbscan_cluster(groups, eps, min_pts, norm);
  const bool one_cluster = r.clustering->clusters.size() == 1 && r.clustering->noise.empty();
  r.label = one_cluster ? Label::RepeatedIBU : Label::MBU;
  return r;
}

ClassificationResult classify(const std::vector<ChangeGroup>& groups, const ClassifierConfig& config) {
  if (config.method == Method::Similarity) return classify_similarity(groups, config.threshold, config.norm);
  return classify_clustering(groups, config.eps, config.min_pts, config.norm);
}

std::vector<ClassificationResult> classify_corpus(
    const std::vector<VulnerabilityRecord>& records,
    const std::map<std::string, std::vector<ChangeGroup>, std::less<>>& groups_by_vuln,
    const ClassifierConfig& config, std::size_t jobs) {
  config.validate();
  std::vector<const std::vector<ChangeGroup>*> inputs;
  for (const auto& rec : records) {
    const auto it = groups_by_vuln.find(rec.vuln_id);
    if (it == groups_by_vuln.end() || it->second.empty()) throw MissingGroups(rec.vuln_id);
    inputs.push_back(&it->second);
  }
  std::vector<ClassificationResult> results(records.size());
  parallel_for(records.size(), jobs, [&](std::size_t i) {
    results[i] = classify(*inputs[i], config);
    results[i].vuln_id = records[i].vuln_id;
  });
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& declared = records[i].declared_unit_count;
    if (declared && *declared != results[i].n_units) {
      spdlog::warn("{}: declared {} base units, grouped {}", records[i].vuln_id, *declared, results[i].n_units);
    }
  }
  std::sort(results.begin(), results.end(),
            [](const ClassificationResult& a, const ClassificationResult& b) { return a.vuln_id < b.vuln_id; });
  return results;
}

}  // namespace patch_triage
