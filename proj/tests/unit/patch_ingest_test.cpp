#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "patch_triage/change_group.hpp"
#include "patch_triage/diff.hpp"
#include "patch_triage/error.hpp"
#include "patch_triage/grammar.hpp"
#include "patch_triage/vcs.hpp"
#include "patch_triage/vulnerability.hpp"

namespace fs = std::filesystem;

namespace patch_triage {
namespace {

std::vector<VulnerabilityRecord> metadata(const std::string& text) {
  std::istringstream in(text);
  return parse_metadata(in);
}

TEST(Metadata, EmptyInput) { EXPECT_TRUE(metadata("").empty()); }

TEST(Metadata, OneRecord) {
  const auto r = metadata(R"({"vuln_id":"V1","repo":"r","patch_hashes":["abc123"]})" "\n");
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0], (VulnerabilityRecord{"V1", "r", {"abc123"}, {}, {}}));
}

TEST(Metadata, DuplicateId) {
  EXPECT_THROW(metadata(R"({"vuln_id":"V1","repo":"r","patch_hashes":["ab"]})"
                        "\n"
                        R"({"vuln_id":"V1","repo":"r","patch_hashes":["cd"]})"),
               DuplicateVulnId);
}

TEST(Metadata, MalformedLinesCarryTheirNumber) {
  try {
    metadata(R"({"vuln_id":"V1","repo":"r","patch_hashes":["ab"]})" "\n\n" R"({"vuln_id":"V2","repo":"r","patch_hashes":["xyz"]})");
    FAIL() << "expected MalformedRecord";
  } catch (const MalformedRecord& e) {
    EXPECT_EQ(e.line_no(), 3u);
  }
  EXPECT_THROW(metadata("{not json"), MalformedRecord);
  EXPECT_THROW(metadata(R"({"vuln_id":"V1","patch_hashes":["ab"]})"), MalformedRecord);
  std::istringstream no_repo(R"({"vuln_id":"V1","patch_hashes":["ab"]})");
  EXPECT_EQ(parse_metadata(no_repo, {.require_repo = false}).size(), 1u);
}

TEST(UnifiedDiff, SingleLineChange) {
  const auto d = parse_unified_diff("--- a/f.c\n+++ b/f.c\n@@ -1,1 +1,1 @@\n-x\n+y\n");
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0].path(), "f.c");
  ASSERT_EQ(d[0].hunks.size(), 1u);
  EXPECT_EQ(d[0].hunks[0].before_start, 1u);
  EXPECT_EQ(d[0].hunks[0].removed_lines(), (std::vector<std::string>{"x"}));
  EXPECT_EQ(d[0].hunks[0].added_lines(), (std::vector<std::string>{"y"}));
}

TEST(UnifiedDiff, TwoFilesInOrderAndRenderRoundTrip) {
  const std::string text =
      "diff --git a/b.c b/b.c\nindex 1..2 100644\n--- a/b.c\n+++ b/b.c\n@@ -2,3 +2,3 @@\n a\n-b\n+B\n c\n"
      "diff --git a/a.c b/a.c\nnew file mode 100644\n--- /dev/null\n+++ b/a.c\n@@ -0,0 +1,2 @@\n+one\n+two\n";
  const auto d = parse_unified_diff(text);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].path(), "b.c");
  EXPECT_EQ(d[1].path(), "a.c");
  EXPECT_FALSE(d[1].path_before.has_value());
  const auto again = parse_unified_diff(render_unified_diff(d));
  ASSERT_EQ(again.size(), 2u);
  EXPECT_EQ(again[0].hunks, d[0].hunks);
  EXPECT_EQ(again[1].hunks, d[1].hunks);
}

TEST(UnifiedDiff, Errors) {
  EXPECT_THROW(parse_unified_diff("--- a/f\n+++ b/f\n@@ -1,2 +1,2 @@\n-x\n"), DiffSyntaxError);
  EXPECT_THROW(parse_unified_diff("@@ -1 +1 @@\n-x\n+y\n"), DiffSyntaxError);
  EXPECT_THROW(parse_unified_diff("--- a/f\n+++ b/f\n@@ -5,1 +5,1 @@\n-x\n+y\n@@ -1,1 +1,1 @@\n-a\n+b\n"),
               DiffSyntaxError);
  EXPECT_TRUE(parse_unified_diff("just some commit message\n").empty());
}

TEST(UnifiedDiff, NoNewlineMarkerAndBinary) {
  const auto d = parse_unified_diff(
      "--- a/f\n+++ b/f\n@@ -1 +1 @@\n-x\n\\ No newline at end of file\n+y\n"
      "diff --git a/img.png b/img.png\nBinary files a/img.png and b/img.png differ\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].hunks[0].lines.size(), 2u);
  EXPECT_TRUE(d[1].binary);
}

TEST(DiffTexts, RandomEditsApplyBothWays) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> len(0, 30), tok(0, 5), op(0, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> a;
    for (int i = len(rng); i > 0; --i) a.push_back("l" + std::to_string(tok(rng)));
    std::vector<std::string> b;
    for (const auto& line : a) {
      switch (op(rng)) {
        case 0: break;
        case 1: b.push_back("new" + std::to_string(tok(rng))); break;
        default: b.push_back(line);
      }
    }
    const auto before = join_lines(a), after = join_lines(b);
    for (std::size_t ctx : {0u, 3u}) {
      const auto hunks = diff_texts(before, after, ctx);
      EXPECT_EQ(apply_hunks(before, hunks), after);
      EXPECT_EQ(apply_hunks(after, hunks, true), before);
      if (ctx == 0) {
        for (const auto& h : hunks) {
          EXPECT_EQ(h.removed_lines().size(), h.before_len);
          EXPECT_EQ(h.added_lines().size(), h.after_len);
        }
      }
    }
  }
}

TEST(DiffTexts, ApplyRejectsMismatch) {
  const auto hunks = diff_texts("a\nb\n", "a\nc\n");
  EXPECT_THROW(apply_hunks("a\nz\n", hunks), Error);
}

TEST(MergePatchSet, CollapsesSameFileAcrossCommits) {
  FileDiff first{"f.c", "f.c", diff_texts("a\n", "b\n"), "a\n", "b\n", false};
  FileDiff second{"f.c", "f.c", diff_texts("b\n", "c\n"), "b\n", "c\n", false};
  FileDiff revert{"g.c", "g.c", diff_texts("x\n", "y\n"), "x\n", "y\n", false};
  FileDiff back{"g.c", "g.c", diff_texts("y\n", "x\n"), "y\n", "x\n", false};
  const auto merged = merge_patch_set({first, revert, second, back});
  ASSERT_EQ(merged.size(), 1u);
  EXPECT_EQ(merged[0].before_text, "a\n");
  EXPECT_EQ(merged[0].after_text, "c\n");
}

FileDiff file_diff(const std::string& path, const std::string& before, const std::string& after) {
  return FileDiff{path, path, diff_texts(before, after), before, after, false};
}

TEST(GroupChanges, OneLineInOneFunction) {
  const std::string before = "int f(int a)\n{\n    return a;\n}\n\nint g(void)\n{\n    return 0;\n}\n";
  const std::string after = "int f(int a)\n{\n    return a + 1;\n}\n\nint g(void)\n{\n    return 0;\n}\n";
  const auto groups = group_changes({file_diff("x.c", before, after)}, UnitKind::Function, GrammarRegistry::builtin());
  ASSERT_EQ(groups.size(), 1u);
  EXPECT_EQ(groups[0].unit.id, "x.c::f");
  EXPECT_TRUE(groups[0].script.has_value());
  EXPECT_FALSE(is_compound(groups));
}

TEST(GroupChanges, LineVersusFunctionGranularity) {
  const std::string before = "int f(int a)\n{\n    int b = a;\n    return b;\n}\n";
  const std::string after = "int f(int a)\n{\n    int b = a * 2;\n    return b - 1;\n}\n";
  const auto registry = GrammarRegistry::builtin();
  const auto lines = group_changes({file_diff("x.c", before, after)}, UnitKind::Line, registry);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0].unit.id, "x.c:3");
  EXPECT_EQ(lines[1].unit.id, "x.c:4");
  EXPECT_EQ(lines[0].encoded, (TokenSequence{"DEL:int", "DEL:b", "DEL:=", "DEL:a;", "ADD:int", "ADD:b", "ADD:=",
                                             "ADD:a", "ADD:*", "ADD:2;"}));
  EXPECT_EQ(group_changes({file_diff("x.c", before, after)}, UnitKind::Function, registry).size(), 1u);
}

TEST(GroupChanges, SameGuardInThreeFunctions) {
  std::string before, after;
  for (const char* name : {"read_a", "read_b", "read_c"}) {
    before += std::string("int ") + name + "(char *buf, int len)\n{\n    memcpy(out, buf, len);\n    return len;\n}\n\n";
    after += std::string("int ") + name +
             "(char *buf, int len)\n{\n    if (len > MAX)\n        return -1;\n    memcpy(out, buf, len);\n    return len;\n}\n\n";
  }
  const auto groups = group_changes({file_diff("q.c", before, after)}, UnitKind::Function, GrammarRegistry::builtin());
  ASSERT_EQ(groups.size(), 3u);
  EXPECT_TRUE(is_compound(groups));
  EXPECT_EQ(groups[0].encoded, groups[1].encoded);
  EXPECT_EQ(groups[1].encoded, groups[2].encoded);
}

TEST(GroupChanges, AddedFunctionAndFileScope) {
  const std::string before = "#define N 4\nint f(void)\n{\n    return N;\n}\n";
  const std::string after = "#define N 8\nint f(void)\n{\n    return N;\n}\nint g(void)\n{\n    return 1;\n}\n";
  const auto groups = group_changes({file_diff("m.c", before, after)}, UnitKind::Function, GrammarRegistry::builtin());
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0].unit.id, "m.c::<file-scope>");
  EXPECT_EQ(groups[1].unit.id, "m.c::g");
  EXPECT_TRUE(groups[1].before_snippet.empty());
}

TEST(GroupChanges, UnknownExtensionNeedsAGrammar) {
  EXPECT_THROW(group_changes({file_diff("x.rs", "a\n", "b\n")}, UnitKind::Function, GrammarRegistry::builtin()),
               GrammarUnavailable);
  EXPECT_EQ(group_changes({file_diff("x.rs", "a\n", "b\n")}, UnitKind::Line, GrammarRegistry::builtin()).size(), 1u);
}

TEST(GroupChanges, UnitKindStrings) {
  EXPECT_EQ(unit_kind_from_string("line"), UnitKind::Line);
  EXPECT_EQ(to_string(UnitKind::Function), "function");
  EXPECT_THROW(unit_kind_from_string("slice"), Error);
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (fs::temp_directory_path() / "patch_triage_test_XXXXXX").string();
    path_ = mkdtemp(pattern.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

int sh(const std::string& cmd) { return std::system(cmd.c_str()); }

std::string git_head(const fs::path& repo) {
  const auto out = repo / ".head";
  sh("git -C '" + repo.string() + "' rev-parse HEAD > '" + out.string() + "'");
  std::ifstream in(out);
  std::string hash;
  in >> hash;
  fs::remove(out);
  return hash;
}

class GitRepo : public ::testing::Test {
 protected:
  void SetUp() override {
    if (sh("git --version > /dev/null 2>&1") != 0) GTEST_SKIP() << "git not installed";
    repo_ = tmp_.path() / "repo";
    fs::create_directories(repo_);
    git("init -q");
    git("config user.email t@example.com");
    git("config user.name tester");
  }
  void git(const std::string& args) {
    ASSERT_EQ(sh("git -C '" + repo_.string() + "' " + args + " > /dev/null 2>&1"), 0) << args;
  }
  std::string commit(const std::string& message) {
    git("add -A");
    git("commit -q --allow-empty -m '" + message + "'");
    return git_head(repo_);
  }

  TempDir tmp_;
  fs::path repo_;
};

TEST_F(GitRepo, RootCommitAddingAFile) {
  write(repo_ / "src/a.c", "int a;\nint b;\nint c;\n");
  const auto h = commit("add");
  const GitAdapter git(tmp_.path() / "cache");
  const auto diffs = git.commit_diff(repo_.string(), h);
  ASSERT_EQ(diffs.size(), 1u);
  EXPECT_EQ(diffs[0].path(), "src/a.c");
  ASSERT_EQ(diffs[0].hunks.size(), 1u);
  EXPECT_TRUE(diffs[0].hunks[0].removed_lines().empty());
  EXPECT_EQ(diffs[0].hunks[0].added_lines().size(), 3u);
  EXPECT_EQ(diffs[0].after_text, "int a;\nint b;\nint c;\n");
}

TEST_F(GitRepo, EmptyCommitAndUnknownHash) {
  write(repo_ / "a.c", "x\n");
  commit("base");
  const auto h = commit("empty");
  const GitAdapter git(tmp_.path() / "cache");
  EXPECT_TRUE(git.commit_diff(repo_.string(), h).empty());
  EXPECT_THROW(git.commit_diff(repo_.string(), std::string(40, 'f')), UnknownCommit);
  EXPECT_THROW(git.commit_diff((tmp_.path() / "missing").string(), h), RepoUnavailable);
}

TEST_F(GitRepo, TwoHashesTouchingDisjointFiles) {
  write(repo_ / "a.c", "int a;\n");
  write(repo_ / "b.c", "int b;\n");
  commit("base");
  write(repo_ / "a.c", "int a = 1;\n");
  const auto h1 = commit("one");
  write(repo_ / "b.c", "int b = 2;\n");
  const auto h2 = commit("two");
  const GitAdapter git(tmp_.path() / "cache");
  const VulnerabilityRecord rec{"V", repo_.string(), {h1, h2}, {}, {}};
  const auto all = fetch_patch(rec, git);
  auto expected = git.commit_diff(repo_.string(), h1);
  for (auto& d : git.commit_diff(repo_.string(), h2)) expected.push_back(std::move(d));
  ASSERT_EQ(all.size(), expected.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(all[i].path(), expected[i].path());
    EXPECT_EQ(all[i].hunks, expected[i].hunks);
    EXPECT_EQ(all[i].after_text, expected[i].after_text);
  }
}

TEST(DiffDir, ReconstructsMissingSide) {
  TempDir tmp;
  write(tmp.path() / "V.diff", "--- a/f.c\n+++ b/f.c\n@@ -1,2 +1,2 @@\n int a;\n-int b;\n+int c;\n");
  write(tmp.path() / "after/V/f.c", "int a;\nint c;\n");
  const DiffDirAdapter dir(tmp.path());
  const auto diffs = dir.fetch({"V", "", {"ab"}, {}, {}});
  ASSERT_EQ(diffs.size(), 1u);
  EXPECT_EQ(diffs[0].before_text, "int a;\nint b;\n");
  EXPECT_THROW(dir.fetch({"W", "", {"ab"}, {}, {}}), RepoUnavailable);
}

}  // namespace
}  // namespace patch_triage
