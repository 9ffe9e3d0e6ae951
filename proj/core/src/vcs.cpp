#include "patch_triage/vcs.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cctype>
#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "patch_triage/error.hpp"

extern char** environ;

namespace patch_triage {

namespace {

constexpr const char* kEmptyTree = "4b825dc642cb6eb9a060e54bf8d69288fbee4904";

struct ProcessResult {
  int exit_code = -1;
  std::string out;
};

// Runs argv[0] from PATH without a shell; stdout is captured, stderr dropped.
ProcessResult run_process(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);

  int pipe_fds[2];
  if (pipe(pipe_fds) != 0) throw Error("cannot create pipe for '" + args.front() + "'");
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addclose(&actions, pipe_fds[0]);
  posix_spawn_file_actions_adddup2(&actions, pipe_fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, pipe_fds[1]);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);

  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(pipe_fds[1]);
  if (rc != 0) {
    close(pipe_fds[0]);
    throw Error("cannot run '" + args.front() + "'");
  }

  ProcessResult result;
  std::array<char, 65536> buf;
  for (;;) {
    const ssize_t n = read(pipe_fds[0], buf.data(), buf.size());
    if (n > 0) {
      result.out.append(buf.data(), static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  close(pipe_fds[0]);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

ProcessResult git(const std::filesystem::path& repo, std::vector<std::string> args) {
  std::vector<std::string> full{"git", "-C", repo.string(), "-c", "core.quotepath=off"};
  full.insert(full.end(), std::make_move_iterator(args.begin()), std::make_move_iterator(args.end()));
  return run_process(full);
}

bool looks_like_url(const std::string& repo) {
  return repo.find("://") != std::string::npos || repo.rfind("git@", 0) == 0;
}

bool has_commit(const std::filesystem::path& repo, const std::string& hash) {
  return git(repo, {"cat-file", "-e", hash + "^{commit}"}).exit_code == 0;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<FileDiff> drop_binary(std::vector<FileDiff> diffs, const std::string& where) {
  std::erase_if(diffs, [&](const FileDiff& fd) {
    if (!fd.binary) return false;
    spdlog::warn("{}: skipping binary file {}", where, fd.path());
    return true;
  });
  return diffs;
}

}  // namespace

GitAdapter::GitAdapter(std::filesystem::path cache_dir) : cache_dir_(std::move(cache_dir)) {}

std::filesystem::path GitAdapter::default_cache_dir() {
  if (const char* env = std::getenv("PATCH_TRIAGE_CACHE"); env && *env) return env;
  if (const char* home = std::getenv("HOME"); home && *home) {
    return std::filesystem::path(home) / ".cache" / "patch_triage";
  }
  return std::filesystem::temp_directory_path() / "patch_triage";
}

std::filesystem::path GitAdapter::resolve_repo(const std::string& repo) const {
  if (!looks_like_url(repo)) {
    std::error_code ec;
    if (!std::filesystem::is_directory(repo, ec) ||
        git(repo, {"rev-parse", "--git-dir"}).exit_code != 0) {
      throw RepoUnavailable(repo);
    }
    return repo;
  }
  std::string name;
  for (char c : repo) name += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
  const auto dest = cache_dir_ / name;
  std::lock_guard lock(clone_mutex_);
  std::error_code ec;
  if (!std::filesystem::exists(dest / "HEAD", ec)) {
    std::filesystem::create_directories(cache_dir_, ec);
    spdlog::info("cloning {} into {}", repo, dest.string());
    if (run_process({"git", "clone", "--bare", "--quiet", repo, dest.string()}).exit_code != 0) {
      throw RepoUnavailable(repo);
    }
  }
  return dest;
}

std::vector<FileDiff> GitAdapter::commit_diff(const std::string& repo, const std::string& hash) const {
  const auto dir = resolve_repo(repo);
  if (!is_hex_hash(hash)) throw UnknownCommit(hash);
  if (!has_commit(dir, hash)) {
    if (looks_like_url(repo)) {
      std::lock_guard lock(clone_mutex_);
      git(dir, {"fetch", "--quiet", "origin", "+refs/heads/*:refs/heads/*"});
    }
    if (!has_commit(dir, hash)) throw UnknownCommit(hash);
  }
  auto parent = git(dir, {"rev-parse", "--verify", "--quiet", hash + "^1"});
  std::string base = kEmptyTree;
  if (parent.exit_code == 0) {
    base = parent.out.substr(0, parent.out.find_first_of("\r\n"));
  }
  const auto diff = git(dir, {"diff", "--no-color", "--no-ext-diff", "--no-renames", "--no-textconv",
                              "-U3", base, hash, "--"});
  if (diff.exit_code != 0) throw UnknownCommit(hash);

  auto diffs = drop_binary(parse_unified_diff(diff.out), repo + "@" + hash);
  for (auto& fd : diffs) {
    if (fd.path_before) {
      fd.before_text = git(dir, {"cat-file", "blob", base + ":" + *fd.path_before}).out;
    }
    if (fd.path_after) {
      fd.after_text = git(dir, {"cat-file", "blob", hash + ":" + *fd.path_after}).out;
    }
  }
  return diffs;
}

std::vector<FileDiff> GitAdapter::fetch(const VulnerabilityRecord& record) const {
  std::vector<FileDiff> out;
  for (const auto& hash : record.patch_hashes) {
    auto part = commit_diff(record.repo, hash);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

DiffDirAdapter::DiffDirAdapter(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::vector<FileDiff> DiffDirAdapter::fetch(const VulnerabilityRecord& record) const {
  const auto diff_path = dir_ / (record.vuln_id + ".diff");
  std::error_code ec;
  if (!std::filesystem::is_regular_file(diff_path, ec)) throw RepoUnavailable(diff_path.string());
  auto diffs = drop_binary(parse_unified_diff(read_file(diff_path)), record.vuln_id);

  auto locate = [&](const char* side, const std::string& path) -> std::optional<std::filesystem::path> {
    for (const auto& candidate : {dir_ / side / record.vuln_id / path, dir_ / side / path}) {
      if (std::filesystem::is_regular_file(candidate, ec)) return candidate;
    }
    return std::nullopt;
  };
  for (auto& fd : diffs) {
    const auto before = fd.path_before ? locate("before", *fd.path_before) : std::nullopt;
    const auto after = fd.path_after ? locate("after", *fd.path_after) : std::nullopt;
    try {
      if (before) {
        fd.before_text = read_file(*before);
      } else if (fd.path_before && after) {
        fd.before_text = apply_hunks(read_file(*after), fd.hunks, true);
      } else if (fd.path_before) {
        throw Error("no text for " + *fd.path_before);
      }
      if (after) {
        fd.after_text = read_file(*after);
      } else if (fd.path_after) {
        fd.after_text = apply_hunks(fd.before_text, fd.hunks);
      }
    } catch (const Error& e) {
      throw Error(record.vuln_id + ": " + e.what());
    }
  }
  return diffs;
}

std::vector<FileDiff> fetch_patch(const VulnerabilityRecord& record, const PatchSource& source) {
  return source.fetch(record);
}

}  // namespace patch_triage
