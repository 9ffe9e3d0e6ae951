#include <gtest/gtest.h>

#include <cmath>

#include "patch_triage/error.hpp"
#include "patch_triage/splitter.hpp"

namespace patch_triage {
namespace {

std::vector<VulnSample> corpus(std::size_t n, std::size_t units_each = 2) {
  std::vector<VulnSample> out;
  for (std::size_t v = 0; v < n; ++v) {
    VulnSample s{"V" + std::to_string(v), {}, units_each > 1 ? Label::MBU : Label::IBU};
    for (std::size_t u = 0; u < units_each; ++u) s.unit_ids.push_back(s.vuln_id + ":u" + std::to_string(u));
    out.push_back(std::move(s));
  }
  return out;
}

std::array<std::size_t, 3> vuln_counts(const SplitAssignment& a, const std::vector<VulnSample>& vulns) {
  std::array<std::size_t, 3> n{};
  for (const auto& v : vulns) ++n[static_cast<std::size_t>(a.entries.at(v.vuln_id))];
  return n;
}

TEST(Apportion, LargestRemainderWithTrainFirst) {
  EXPECT_EQ(apportion(10, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{8, 1, 1}));
  EXPECT_EQ(apportion(16, {0.8, 0.1, 0.1}), (std::array<std::size_t, 3>{13, 2, 1}));
  EXPECT_EQ(apportion(3, {1.0 / 3, 1.0 / 3, 1.0 / 3}), (std::array<std::size_t, 3>{1, 1, 1}));
  EXPECT_EQ(apportion(2, {1.0 / 3, 1.0 / 3, 1.0 / 3}), (std::array<std::size_t, 3>{1, 1, 0}));
  EXPECT_EQ(apportion(7, {0.5, 0.0, 0.5}), (std::array<std::size_t, 3>{4, 0, 3}));
}

TEST(AssignSplits, TenVulnsSplitEightOneOne) {
  const auto vulns = corpus(10);
  for (std::uint64_t seed : {0u, 1u, 42u}) {
    SplitConfig cfg;
    cfg.seed = seed;
    EXPECT_EQ(vuln_counts(assign_splits(vulns, {}, cfg), vulns), (std::array<std::size_t, 3>{8, 1, 1}));
  }
}

TEST(AssignSplits, UnitsFollowTheirVulnerability) {
  auto vulns = corpus(6);
  vulns[0].unit_ids = {"m1", "m2", "m3", "m4", "m5"};
  const auto a = assign_splits(vulns, {}, {});
  const auto split = a.entries.at(vulns[0].vuln_id);
  for (const auto& u : vulns[0].unit_ids) EXPECT_EQ(resolve_split(a, u), split);
  EXPECT_FALSE(resolve_split(a, "unknown").has_value());
  EXPECT_TRUE(verify_splits(a, vulns).violations.empty());
}

TEST(AssignSplits, DeterministicPerSeed) {
  const auto vulns = corpus(50);
  std::vector<NonVulnSample> nv;
  for (int i = 0; i < 30; ++i) nv.push_back({"n" + std::to_string(i), std::nullopt});
  SplitConfig cfg;
  cfg.seed = 7;
  const auto a = assign_splits(vulns, nv, cfg), b = assign_splits(vulns, nv, cfg);
  EXPECT_EQ(a.entries, b.entries);
  cfg.seed = 8;
  EXPECT_NE(assign_splits(vulns, nv, cfg).entries, a.entries);
}

TEST(AssignSplits, GroupedNonVulnerableStayTogether) {
  std::vector<NonVulnSample> nv;
  for (int g = 0; g < 10; ++g) {
    for (int k = 0; k < 3; ++k) nv.push_back({"g" + std::to_string(g) + "s" + std::to_string(k), "p" + std::to_string(g)});
  }
  const auto a = assign_splits(corpus(5), nv, {});
  for (int g = 0; g < 10; ++g) {
    const std::string p = "g" + std::to_string(g);
    EXPECT_EQ(a.entries.at(p + "s0"), a.entries.at(p + "s1"));
    EXPECT_EQ(a.entries.at(p + "s0"), a.entries.at(p + "s2"));
  }
}

TEST(AssignSplits, BalancingDropsTrainingNonVulnerable) {
  const auto vulns = corpus(10);
  std::vector<NonVulnSample> nv;
  for (int i = 0; i < 100; ++i) nv.push_back({"n" + std::to_string(i), std::nullopt});
  SplitConfig cfg;
  cfg.balance = true;
  const auto a = assign_splits(vulns, nv, cfg);
  std::size_t train_nv = 0;
  for (const auto& s : nv) {
    const auto it = a.entries.find(s.sample_id);
    if (it != a.entries.end() && it->second == Split::Train) ++train_nv;
  }
  EXPECT_EQ(train_nv, 8u);
  EXPECT_EQ(a.dropped.size(), 72u);
  EXPECT_TRUE(std::is_sorted(a.dropped.begin(), a.dropped.end()));
}

TEST(AssignSplits, Errors) {
  EXPECT_THROW(assign_splits({}, {}, {}), EmptyCorpus);
  SplitConfig bad;
  bad.ratios = {0.5, 0.5, 0.5};
  EXPECT_THROW(assign_splits(corpus(3), {}, bad), RatioInvalid);
  bad.ratios = {1.2, -0.1, -0.1};
  EXPECT_THROW(assign_splits(corpus(3), {}, bad), RatioInvalid);
  auto dup = corpus(3);
  dup[1].vuln_id = dup[0].vuln_id;
  EXPECT_THROW(assign_splits(dup, {}, {}), Error);
}

TEST(VerifySplits, HandBuiltViolation) {
  const std::vector<VulnSample> vulns{{"A", {"a1", "a2"}, Label::MBU}};
  const std::map<std::string, Split, std::less<>> units{{"a1", Split::Train}, {"a2", Split::Test}};
  const auto audit = verify_splits(units, vulns);
  ASSERT_EQ(audit.violations.size(), 1u);
  EXPECT_EQ(audit.violations[0].splits_touched, (std::vector<Split>{Split::Train, Split::Test}));
  EXPECT_EQ(audit.violations[0].units_per_split.at(Split::Test), 1u);
}

TEST(VerifySplits, LegacySplitScatteringNineteenOfTwenty) {
  const auto vulns = corpus(20, 3);
  std::map<std::string, Split, std::less<>> units;
  for (std::size_t v = 0; v < vulns.size(); ++v) {
    for (std::size_t u = 0; u < 3; ++u) {
      const bool scatter = v < 19 && u == 2;
      units[vulns[v].unit_ids[u]] = scatter ? Split::Test : Split::Train;
    }
  }
  const auto audit = verify_splits(units, vulns);
  EXPECT_EQ(audit.violations.size(), 19u);
  EXPECT_EQ(audit.mbu_total, 20u);
  EXPECT_DOUBLE_EQ(*audit.mbu_violation_pct, 95.0);
}

TEST(VerifySplits, UncoveredUnitsAreReported) {
  const std::vector<VulnSample> vulns{{"A", {"a1", "a2"}, Label::MBU}};
  const auto audit = verify_splits(std::map<std::string, Split, std::less<>>{{"a1", Split::Val}}, vulns);
  EXPECT_TRUE(audit.violations.empty());
  EXPECT_EQ(audit.uncovered_units, (std::vector<std::string>{"a2"}));
}

TEST(SplitStrings, Parse) {
  EXPECT_EQ(split_from_string("validation"), Split::Val);
  EXPECT_EQ(to_string(Split::Test), "test");
  EXPECT_THROW(split_from_string("dev"), Error);
}

}  // namespace
}  // namespace patch_triage
