#include <gtest/gtest.h>

#include "patch_triage/change_group.hpp"
#include "patch_triage/diff.hpp"
#include "patch_triage/error.hpp"
#include "patch_triage/grammar.hpp"
#include "patch_triage/patch_cleaner.hpp"

namespace patch_triage {
namespace {

ChangeGroup function_group(const std::string& id, const std::string& before, const std::string& after) {
  const FileDiff d{"x.c", "x.c", diff_texts(before, after), before, after, false};
  auto groups = group_changes({d}, UnitKind::Function, GrammarRegistry::builtin());
  EXPECT_EQ(groups.size(), 1u);
  groups[0].unit.id = id;
  return groups[0];
}

ChangeGroup line_group(const std::string& before, const std::string& after) {
  ChangeGroup g;
  g.unit = {UnitKind::Line, "x.c:1"};
  g.before_snippet = before;
  g.after_snippet = after;
  return g;
}

TEST(Cleaner, EmptyRegistryKeepsEverything) {
  const std::vector<ChangeGroup> groups{line_group("a", "a ")};
  const auto r = apply_rules("V", groups, RuleRegistry{});
  EXPECT_EQ(r.kept, groups);
  EXPECT_TRUE(r.removed.empty());
  EXPECT_FALSE(r.noise_only);
}

TEST(Cleaner, WhitespaceOnly) {
  const auto g = function_group("f", "int f(void)\n{\n    return 1;\n}\n", "int f(void)\n{\n  return   1;\n}\n");
  const auto r = apply_rules("V", {g}, RuleRegistry::builtin());
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_EQ(r.removed[0].rule_id, "ws-only");
  EXPECT_TRUE(r.noise_only);
}

TEST(Cleaner, CommentOnlyAmongRealChanges) {
  const std::string before =
      "int f(int a)\n{\n    return a;\n}\n\nint g(int b)\n{\n    return b;\n}\n\nint h(int c)\n{\n    return c;\n}\n";
  const std::string after =
      "int f(int a)\n{\n    if (a < 0)\n        return 0;\n    return a;\n}\n\n"
      "int g(int b)\n{\n    /* never negative */\n    return b;\n}\n\n"
      "int h(int c)\n{\n    return c + 1;\n}\n";
  const FileDiff d{"x.c", "x.c", diff_texts(before, after), before, after, false};
  const auto groups = group_changes({d}, UnitKind::Function, GrammarRegistry::builtin());
  ASSERT_EQ(groups.size(), 3u);
  const auto r = apply_rules("V", groups, RuleRegistry::builtin());
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_EQ(r.removed[0].group.unit.id, "x.c::g");
  EXPECT_EQ(r.removed[0].rule_id, "comment-only");
  EXPECT_EQ(r.kept.size(), 2u);
  EXPECT_FALSE(r.noise_only);
}

TEST(Cleaner, StringLiteralChangeIsNotCommentOnly) {
  const auto g = function_group("f", "void f(void)\n{\n    puts(\"a\");\n}\n", "void f(void)\n{\n    puts(\"b\");\n}\n");
  EXPECT_TRUE(apply_rules("V", {g}, RuleRegistry::builtin()).removed.empty());
}

TEST(Cleaner, RenameOnlyNeedsABijection) {
  const auto renamed = function_group("f", "int f(int a)\n{\n    int t = a;\n    return t + a;\n}\n",
                                      "int f(int a)\n{\n    int tmp = a;\n    return tmp + a;\n}\n");
  const auto r = apply_rules("V", {renamed}, RuleRegistry::builtin());
  ASSERT_EQ(r.removed.size(), 1u);
  EXPECT_EQ(r.removed[0].rule_id, "rename-only");

  // t and u both become v: not a bijection.
  const auto merged = function_group("f", "int f(int t, int u)\n{\n    return t + u;\n}\n",
                                     "int f(int v, int w)\n{\n    return v + v;\n}\n");
  EXPECT_TRUE(apply_rules("V", {merged}, RuleRegistry::builtin()).removed.empty());
}

TEST(Cleaner, RenameOnlyOnLineUnits) {
  const auto reg = RuleRegistry::builtin();
  EXPECT_EQ(apply_rules("V", {line_group("x = y + 1;", "count = y + 1;")}, reg).removed.size(), 1u);
  EXPECT_TRUE(apply_rules("V", {line_group("x = y + 1;", "x = y + 2;")}, reg).removed.empty());
}

TEST(Cleaner, RegistrySelection) {
  const auto all = RuleRegistry::builtin();
  ASSERT_EQ(all.rules().size(), 3u);
  EXPECT_EQ(all.rules()[0].rule_id, "ws-only");
  const auto one = all.select({"rename-only"});
  EXPECT_EQ(one.rules().size(), 1u);
  EXPECT_THROW(all.select({"nope"}), Error);
  RuleRegistry r;
  r.add({"x", "", [](const ChangeGroup&) { return true; }});
  EXPECT_THROW(r.add({"x", "", [](const ChangeGroup&) { return false; }}), Error);
}

}  // namespace
}  // namespace patch_triage
