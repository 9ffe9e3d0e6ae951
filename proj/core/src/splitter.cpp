#include "patch_triage/splitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "patch_triage/error.hpp"

namespace patch_triage {

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "train";
}

Split split_from_string(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val" || text == "validation") return Split::Val;
  if (text == "test") return Split::Test;
  throw Error("unknown split '" + std::string(text) + "'");
}

void SplitConfig::validate() const {
  double sum = 0;
  for (double r : ratios) {
    if (!std::isfinite(r) || r < 0) throw RatioInvalid("split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw RatioInvalid("split ratios must sum to 1");
}

std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& ratios) {
  const double total = ratios[0] + ratios[1] + ratios[2];
  std::array<std::size_t, 3> counts{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double quota = ratios[i] / total * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(quota));
    remainders[i] = quota - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t k = 0; assigned < n; k = (k + 1) % 3, ++assigned) ++counts[order[k]];
  return counts;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Largest multiple of `bound` representable; values above it are redrawn.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

void seeded_shuffle(std::vector<std::string>& items, std::mt19937_64& rng) {
  std::sort(items.begin(), items.end());
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

namespace {

template <typename OnItem>
void distribute(std::vector<std::string> keys, const SplitConfig& config, std::mt19937_64& rng, OnItem on_item) {
  seeded_shuffle(keys, rng);
  const auto counts = apportion(keys.size(), config.ratios);
  std::size_t k = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t c = 0; c < counts[s]; ++c) on_item(keys[k++], kAllSplits[s]);
  }
}

}  // namespace

SplitAssignment assign_splits(const std::vector<VulnSample>& vulns, const std::vector<NonVulnSample>& non_vuln,
                              const SplitConfig& config) {
  config.validate();
  if (vulns.empty() && non_vuln.empty()) throw EmptyCorpus("nothing to split");

  SplitAssignment out;
  std::mt19937_64 rng(config.seed);

  std::vector<std::string> vuln_ids;
  for (const auto& v : vulns) {
    if (!out.entries.emplace(v.vuln_id, Split::Train).second) throw Error("duplicate sample id '" + v.vuln_id + "'");
    vuln_ids.push_back(v.vuln_id);
    for (const auto& u : v.unit_ids) {
      const auto [it, fresh] = out.unit_owner.emplace(u, v.vuln_id);
      if (!fresh && it->second != v.vuln_id) throw Error("unit '" + u + "' belongs to two vulnerabilities");
    }
  }
  std::size_t train_vulns = 0;
  distribute(vuln_ids, config, rng, [&](const std::string& id, Split s) {
    out.entries[id] = s;
    train_vulns += s == Split::Train ? 1 : 0;
  });

  // Non-vulnerable samples move as groups; an ungrouped sample is its own
  // group. Group keys are prefixed so they cannot collide with sample ids.
  std::map<std::string, std::vector<std::string>> members;
  std::set<std::string> seen;
  for (const auto& s : non_vuln) {
    if (out.entries.count(s.sample_id) || !seen.insert(s.sample_id).second) {
      throw Error("duplicate sample id '" + s.sample_id + "'");
    }
    members[s.group ? "g:" + *s.group : "s:" + s.sample_id].push_back(s.sample_id);
  }
  std::vector<std::string> group_keys;
  for (const auto& [key, ids] : members) group_keys.push_back(key);
  std::vector<std::string> train_samples;
  distribute(group_keys, config, rng, [&](const std::string& key, Split s) {
    for (const auto& id : members[key]) {
      out.entries[id] = s;
      if (s == Split::Train) train_samples.push_back(id);
    }
  });

  if (config.balance && train_samples.size() > train_vulns) {
    seeded_shuffle(train_samples, rng);
    for (std::size_t i = train_vulns; i < train_samples.size(); ++i) {
      out.entries.erase(train_samples[i]);
      out.dropped.push_back(train_samples[i]);
    }
    std::sort(out.dropped.begin(), out.dropped.end());
  }
  return out;
}

std::optional<Split> resolve_split(const SplitAssignment& assignment, std::string_view id) {
  if (auto it = assignment.entries.find(id); it != assignment.entries.end()) return it->second;
  if (auto owner = assignment.unit_owner.find(id); owner != assignment.unit_owner.end()) {
    if (auto it = assignment.entries.find(owner->second); it != assignment.entries.end()) return it->second;
  }
  return std::nullopt;
}

SplitAudit verify_splits(const std::map<std::string, Split, std::less<>>& unit_assignment,
                         const std::vector<VulnSample>& vulns) {
  SplitAudit audit;
  std::vector<const VulnSample*> ordered;
  for (const auto& v : vulns) ordered.push_back(&v);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const VulnSample* a, const VulnSample* b) { return a->vuln_id < b->vuln_id; });
  for (const VulnSample* v : ordered) {
    SplitViolation candidate{v->vuln_id, {}, {}};
    for (const auto& u : v->unit_ids) {
      const auto it = unit_assignment.find(u);
      if (it == unit_assignment.end()) {
        audit.uncovered_units.push_back(u);
      } else {
        ++candidate.units_per_split[it->second];
      }
    }
    for (const auto& [split, count] : candidate.units_per_split) candidate.splits_touched.push_back(split);
    const bool violated = candidate.splits_touched.size() >= 2;
    if (v->label == Label::MBU) {
      ++audit.mbu_total;
      audit.mbu_violated += violated ? 1 : 0;
    }
    if (violated) audit.violations.push_back(std::move(candidate));
  }
  std::sort(audit.uncovered_units.begin(), audit.uncovered_units.end());
  if (audit.mbu_total > 0) {
    audit.mbu_violation_pct =
        100.0 * static_cast<double>(audit.mbu_violated) / static_cast<double>(audit.mbu_total);
  }
  return audit;
}

SplitAudit verify_splits(const SplitAssignment& assignment, const std::vector<VulnSample>& vulns) {
  std::map<std::string, Split, std::less<>> units;
  for (const auto& v : vulns) {
    const auto owner = assignment.entries.find(v.vuln_id);
    for (const auto& u : v.unit_ids) {
      if (owner != assignment.entries.end()) {
        units[u] = owner->second;
      } else if (auto direct = assignment.entries.find(u); direct != assignment.entries.end()) {
        units[u] = direct->second;
      }
    }
  }
  return verify_splits(units, vulns);
}

}  // namespace patch_triage
