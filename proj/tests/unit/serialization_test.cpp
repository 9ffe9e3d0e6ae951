#include <gtest/gtest.h>

#include <sstream>

#include "patch_triage/c_grammar.hpp"
#include "patch_triage/error.hpp"
#include "patch_triage/serialization.hpp"

namespace patch_triage {
namespace {

TEST(Serialization, GroupRecordRoundTrip) {
  const CLikeGrammar g;
  ChangeGroup group;
  group.unit = {UnitKind::Function, "a.c::f"};
  group.before_snippet = "int f(int a) { return a; }";
  group.after_snippet = "int f(int a) { if (!a) return 1; return a; }";
  group.script = diff_trees(g.parse(group.before_snippet), g.parse(group.after_snippet));
  group.encoded = encode_script(*group.script);
  const GroupRecord r{"V1", group};
  const auto back = group_record_from_json(Json::parse(to_json(r).dump()));
  EXPECT_EQ(back.vuln_id, "V1");
  EXPECT_EQ(back.group, group);
}

TEST(Serialization, ClassificationRoundTrip) {
  ClassificationResult c;
  c.vuln_id = "V";
  c.label = Label::MBU;
  c.n_units = 2;
  c.method = Method::Clustering;
  c.min_similarity = 0.25;
  c.min_pair = UnitPair{"a", "b"};
  c.units = {"a", "b"};
  c.clustering = Clustering{{}, {"a", "b"}};
  const auto j = to_json(c, UnitKind::Function, ClassifierConfig{});
  EXPECT_EQ(j["base_unit"], "function");
  EXPECT_EQ(j["config"]["threshold"], 0.70);
  const auto back = classification_from_json(j);
  EXPECT_EQ(back.label, c.label);
  EXPECT_EQ(back.min_pair, c.min_pair);
  EXPECT_EQ(back.clustering, c.clustering);
}

TEST(Serialization, ReportUsesNullForUndefinedRates) {
  MetricsReport r;
  r.base.tpr = 0.5;
  const auto j = to_json(r);
  EXPECT_EQ(j["TPR"]["base"], 0.5);
  EXPECT_TRUE(j["TPR"]["mbu"].is_null());
  EXPECT_TRUE(j["MCC"]["adjusted"].is_null());
  EXPECT_EQ(j["counts"]["base"]["tp"], 0);
}

TEST(Serialization, JsonlErrorsNameTheLine) {
  std::istringstream in("{\"unit_id\":\"a\",\"true_label\":true,\"predicted_label\":false}\n\n{\"unit_id\":1}\n");
  try {
    for_each_jsonl(in, [](std::size_t, const Json& j) { prediction_from_json(j); });
    FAIL() << "expected MalformedRecord";
  } catch (const MalformedRecord& e) {
    EXPECT_EQ(e.line_no(), 3u);
  }
  std::istringstream bad_label("{\"unit_id\":\"a\",\"vuln_id\":\"V\",\"true_label\":false,\"predicted_label\":false}\n");
  EXPECT_THROW(for_each_jsonl(bad_label, [](std::size_t, const Json& j) { prediction_from_json(j); }),
               MalformedRecord);
}

}  // namespace
}  // namespace patch_triage
