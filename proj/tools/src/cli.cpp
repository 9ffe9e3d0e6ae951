#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "manifest.hpp"
#include "patch_triage/change_group.hpp"
#include "patch_triage/classifier.hpp"
#include "patch_triage/error.hpp"
#include "patch_triage/metrics.hpp"
#include "patch_triage/parallel.hpp"
#include "patch_triage/patch_cleaner.hpp"
#include "patch_triage/serialization.hpp"
#include "patch_triage/splitter.hpp"
#include "patch_triage/vcs.hpp"
#include "patch_triage/version.hpp"

namespace patch_triage::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  fs::path out;
  std::size_t jobs = 0;
};

struct CollectOptions {
  fs::path metadata;
  fs::path diff_dir;
  std::string base_unit = "function";
  bool clean = false;
  std::vector<std::string> rules{"ws-only", "comment-only", "rename-only"};
};

struct CleanOptions {
  fs::path groups;
  std::vector<std::string> rules{"ws-only", "comment-only", "rename-only"};
};

struct ClassifyOptions {
  fs::path groups;
  fs::path metadata;
  std::string method = "similarity";
  double threshold = 0.70;
  double eps = 0.30;
  std::size_t min_pts = 2;
  std::string sim_norm = "dice";
};

struct SplitOptions {
  fs::path classifications;
  fs::path non_vuln;
  fs::path verify;
  std::string ratios = "0.8,0.1,0.1";
  std::uint64_t seed = 0;
  bool balance = false;
};

struct ScoreOptions {
  fs::path predictions;
  fs::path classifications;
};

struct StatsOptions {
  fs::path classifications;
};

void require_file(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error("input file not found: " + path.string());
}

void prepare_out(const fs::path& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw Error("cannot create output directory: " + out.string());
}

void write_jsonl(const fs::path& path, const std::vector<Json>& rows) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  for (const auto& row : rows) out << row.dump() << '\n';
}

void write_json(const fs::path& path, const Json& value) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << value.dump(2) << '\n';
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Groups file rows bucketed by vuln_id (sorted), keeping file order inside
/// a vulnerability.
std::map<std::string, std::vector<ChangeGroup>, std::less<>> read_groups(const fs::path& path) {
  require_file(path);
  std::map<std::string, std::vector<ChangeGroup>, std::less<>> out;
  for_each_jsonl(path, [&](std::size_t, const Json& j) {
    auto record = group_record_from_json(j);
    out[record.vuln_id].push_back(std::move(record.group));
  });
  return out;
}

std::vector<ClassificationResult> read_classifications(const fs::path& path) {
  require_file(path);
  std::vector<ClassificationResult> out;
  std::set<std::string> seen;
  for_each_jsonl(path, [&](std::size_t, const Json& j) {
    auto c = classification_from_json(j);
    if (!seen.insert(c.vuln_id).second) throw DuplicateVulnId(c.vuln_id);
    out.push_back(std::move(c));
  });
  return out;
}

Json cleaner_log_row(const std::string& vuln_id, const RemovedGroup& removed) {
  return Json{{"vuln_id", vuln_id}, {"unit_id", removed.group.unit.id}, {"rule_id", removed.rule_id}};
}

int cmd_collect(const Common& common, const CollectOptions& opt) {
  require_file(opt.metadata);
  const UnitKind kind = unit_kind_from_string(opt.base_unit);
  const bool from_dir = !opt.diff_dir.empty();
  if (from_dir && !fs::is_directory(opt.diff_dir)) throw Error("diff directory not found: " + opt.diff_dir.string());
  const auto records = load_metadata(opt.metadata, MetadataOptions{.require_repo = !from_dir});
  const RuleRegistry rules = opt.clean ? RuleRegistry::builtin().select(opt.rules) : RuleRegistry{};
  prepare_out(common.out);

  std::unique_ptr<PatchSource> source;
  if (from_dir) {
    source = std::make_unique<DiffDirAdapter>(opt.diff_dir);
  } else {
    source = std::make_unique<GitAdapter>();
  }
  const GrammarRegistry grammars = GrammarRegistry::builtin();

  std::vector<std::optional<CleanReport>> results(records.size());
  parallel_for(records.size(), common.jobs, [&](std::size_t i) {
    const auto& rec = records[i];
    try {
      const auto groups = group_changes(fetch_patch(rec, *source), kind, grammars);
      if (groups.empty()) spdlog::warn("{}: patch set has no text changes", rec.vuln_id);
      results[i] = apply_rules(rec.vuln_id, groups, rules);
    } catch (const std::exception& e) {
      spdlog::warn("{}: skipped: {}", rec.vuln_id, e.what());
    }
  });

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return records[a].vuln_id < records[b].vuln_id; });
  std::vector<Json> rows, log_rows;
  std::size_t succeeded = 0;
  for (std::size_t i : order) {
    if (!results[i]) continue;
    ++succeeded;
    const CleanReport& report = *results[i];
    if (report.noise_only) spdlog::warn("{}: every change group was removed as noise", report.vuln_id);
    for (const auto& g : report.kept) rows.push_back(to_json(GroupRecord{report.vuln_id, g}));
    for (const auto& r : report.removed) log_rows.push_back(cleaner_log_row(report.vuln_id, r));
  }
  write_jsonl(common.out / "groups.jsonl", rows);

  RunManifest manifest;
  manifest.subcommand = "collect";
  manifest.config = {{"metadata", opt.metadata.string()},
                     {"diff_dir", from_dir ? Json(opt.diff_dir.string()) : Json(nullptr)},
                     {"base_unit", opt.base_unit},
                     {"clean", opt.clean},
                     {"rules", opt.clean ? Json(opt.rules) : Json::array()},
                     {"cache_dir", from_dir ? Json(nullptr) : Json(GitAdapter::default_cache_dir().string())}};
  manifest.default_sources = {{"base_unit", "published"}, {"clean", "published"}};
  manifest.inputs.push_back(opt.metadata);
  if (from_dir) {
    for (auto& p : files_under(opt.diff_dir)) manifest.inputs.push_back(std::move(p));
  }
  manifest.outputs.push_back("groups.jsonl");
  if (opt.clean) {
    write_jsonl(common.out / "cleaner_log.jsonl", log_rows);
    manifest.outputs.push_back("cleaner_log.jsonl");
  }
  manifest.write(common.out);

  spdlog::info("collect: {} of {} vulnerabilities, {} change groups", succeeded, records.size(), rows.size());
  if (!records.empty() && succeeded == 0) {
    spdlog::error("collect: every vulnerability failed");
    return kExitData;
  }
  return kExitOk;
}

int cmd_clean(const Common& common, const CleanOptions& opt) {
  const auto groups = read_groups(opt.groups);
  const RuleRegistry rules = RuleRegistry::builtin().select(opt.rules);
  prepare_out(common.out);

  std::vector<std::pair<std::string, const std::vector<ChangeGroup>*>> items;
  for (const auto& [id, g] : groups) items.emplace_back(id, &g);
  std::vector<CleanReport> reports(items.size());
  parallel_for(items.size(), common.jobs,
               [&](std::size_t i) { reports[i] = apply_rules(items[i].first, *items[i].second, rules); });

  std::vector<Json> rows, log_rows;
  for (const auto& report : reports) {
    if (report.noise_only) spdlog::warn("{}: every change group was removed as noise", report.vuln_id);
    for (const auto& g : report.kept) rows.push_back(to_json(GroupRecord{report.vuln_id, g}));
    for (const auto& r : report.removed) log_rows.push_back(cleaner_log_row(report.vuln_id, r));
  }
  write_jsonl(common.out / "groups.clean.jsonl", rows);
  write_jsonl(common.out / "cleaner_log.jsonl", log_rows);

  RunManifest manifest;
  manifest.subcommand = "clean";
  manifest.config = {{"groups", opt.groups.string()}, {"rules", opt.rules}};
  manifest.default_sources = {{"rules", "design"}};
  manifest.inputs.push_back(opt.groups);
  manifest.outputs = {"groups.clean.jsonl", "cleaner_log.jsonl"};
  manifest.write(common.out);
  spdlog::info("clean: kept {} groups, removed {}", rows.size(), log_rows.size());
  return kExitOk;
}

int cmd_classify(const Common& common, const ClassifyOptions& opt) {
  ClassifierConfig config;
  config.method = method_from_string(opt.method);
  config.threshold = opt.threshold;
  config.eps = opt.eps;
  config.min_pts = opt.min_pts;
  config.norm = sim_norm_from_string(opt.sim_norm);
  config.validate();

  const auto groups = read_groups(opt.groups);
  std::optional<UnitKind> kind;
  for (const auto& [id, list] : groups) {
    for (const auto& g : list) {
      if (kind && *kind != g.unit.kind) throw Error("groups file mixes line and function base units");
      kind = g.unit.kind;
    }
  }

  std::map<std::string, VulnerabilityRecord> declared;
  if (!opt.metadata.empty()) {
    require_file(opt.metadata);
    for (auto& r : load_metadata(opt.metadata, MetadataOptions{.require_repo = false})) {
      if (!groups.count(r.vuln_id)) {
        spdlog::warn("{}: no change groups; not classified", r.vuln_id);
        continue;
      }
      declared.emplace(r.vuln_id, std::move(r));
    }
  }
  std::vector<VulnerabilityRecord> records;
  for (const auto& [id, list] : groups) {
    const auto it = declared.find(id);
    records.push_back(it != declared.end() ? it->second : VulnerabilityRecord{id, {}, {}, {}, {}});
  }
  prepare_out(common.out);
  const auto results = classify_corpus(records, groups, config, common.jobs);

  std::vector<Json> rows;
  std::map<std::string, std::size_t> tally;
  for (const auto& r : results) {
    rows.push_back(to_json(r, kind.value_or(UnitKind::Function), config));
    ++tally[std::string(to_string(r.label))];
  }
  write_jsonl(common.out / "classifications.jsonl", rows);

  RunManifest manifest;
  manifest.subcommand = "classify";
  manifest.config = {{"groups", opt.groups.string()},
                     {"metadata", opt.metadata.empty() ? Json(nullptr) : Json(opt.metadata.string())},
                     {"method", opt.method},
                     {"threshold", opt.threshold},
                     {"eps", opt.eps},
                     {"min_pts", opt.min_pts},
                     {"sim_norm", opt.sim_norm}};
  manifest.default_sources = {{"method", "published"}, {"threshold", "published"}, {"eps", "design"},
                              {"min_pts", "design"}, {"sim_norm", "design"}};
  manifest.inputs.push_back(opt.groups);
  if (!opt.metadata.empty()) manifest.inputs.push_back(opt.metadata);
  manifest.outputs = {"classifications.jsonl"};
  manifest.write(common.out);
  spdlog::info("classify: {} vulnerabilities (IBU {}, RepeatedIBU {}, MBU {})", results.size(), tally["IBU"],
               tally["RepeatedIBU"], tally["MBU"]);
  return kExitOk;
}

std::array<double, 3> parse_ratios(const std::string& text) {
  std::array<double, 3> ratios{};
  std::stringstream in(text);
  std::string part;
  std::size_t n = 0;
  while (std::getline(in, part, ',')) {
    if (n == 3) throw CLI::ValidationError("--ratios", "expected three comma-separated fractions");
    try {
      std::size_t used = 0;
      ratios[n++] = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::logic_error&) {
      throw CLI::ValidationError("--ratios", "'" + part + "' is not a number");
    }
  }
  if (n != 3) throw CLI::ValidationError("--ratios", "expected three comma-separated fractions");
  return ratios;
}

std::vector<VulnSample> vuln_samples(const std::vector<ClassificationResult>& classifications) {
  std::vector<VulnSample> out;
  for (const auto& c : classifications) out.push_back({c.vuln_id, c.units, c.label});
  return out;
}

int cmd_split(const Common& common, const SplitOptions& opt) {
  const auto classifications = read_classifications(opt.classifications);
  const auto vulns = vuln_samples(classifications);
  prepare_out(common.out);
  RunManifest manifest;
  manifest.subcommand = "split";
  manifest.inputs.push_back(opt.classifications);

  if (!opt.verify.empty()) {
    require_file(opt.verify);
    std::map<std::string, Split, std::less<>> units, by_vuln;
    std::set<std::string, std::less<>> vuln_ids;
    for (const auto& v : vulns) vuln_ids.insert(v.vuln_id);
    for_each_jsonl(opt.verify, [&](std::size_t, const Json& j) {
      auto id = require_string(j, "sample_id");
      const Split split = split_from_string(require_string(j, "split"));
      (vuln_ids.count(id) ? by_vuln : units)[std::move(id)] = split;
    });
    // A vulnerability-level row covers every unit not listed on its own.
    for (const auto& v : vulns) {
      const auto it = by_vuln.find(v.vuln_id);
      if (it == by_vuln.end()) continue;
      for (const auto& u : v.unit_ids) units.emplace(u, it->second);
    }
    const auto audit = verify_splits(units, vulns);
    std::vector<Json> rows;
    for (const auto& v : audit.violations) rows.push_back(to_json(v));
    write_jsonl(common.out / "violations.jsonl", rows);
    write_json(common.out / "audit.json", Json{{"violations", audit.violations.size()},
                                               {"mbu_total", audit.mbu_total},
                                               {"mbu_violated", audit.mbu_violated},
                                               {"mbu_violation_pct", audit.mbu_violation_pct
                                                                         ? Json(*audit.mbu_violation_pct)
                                                                         : Json(nullptr)},
                                               {"uncovered_units", audit.uncovered_units}});
    manifest.config = {{"classifications", opt.classifications.string()}, {"verify", opt.verify.string()}};
    manifest.inputs.push_back(opt.verify);
    manifest.outputs = {"violations.jsonl", "audit.json"};
    manifest.write(common.out);
    spdlog::info("split: {} vulnerabilities span several splits", audit.violations.size());
    return kExitOk;
  }

  SplitConfig config;
  config.ratios = parse_ratios(opt.ratios);
  config.seed = opt.seed;
  config.balance = opt.balance;
  std::vector<NonVulnSample> non_vuln;
  if (!opt.non_vuln.empty()) {
    require_file(opt.non_vuln);
    for_each_jsonl(opt.non_vuln, [&](std::size_t, const Json& j) {
      NonVulnSample s{require_string(j, "sample_id"), std::nullopt};
      if (const auto it = j.find("group"); it != j.end() && !it->is_null()) s.group = it->get<std::string>();
      non_vuln.push_back(std::move(s));
    });
  }
  const auto assignment = assign_splits(vulns, non_vuln, config);
  std::vector<Json> rows, dropped;
  for (const auto& [id, split] : assignment.entries) rows.push_back(Json{{"sample_id", id}, {"split", to_string(split)}});
  for (const auto& id : assignment.dropped) dropped.push_back(Json{{"sample_id", id}});
  write_jsonl(common.out / "splits.jsonl", rows);
  manifest.outputs = {"splits.jsonl"};
  if (config.balance) {
    write_jsonl(common.out / "dropped.jsonl", dropped);
    manifest.outputs.push_back("dropped.jsonl");
  }
  manifest.config = {{"classifications", opt.classifications.string()},
                     {"non_vuln", opt.non_vuln.empty() ? Json(nullptr) : Json(opt.non_vuln.string())},
                     {"ratios", config.ratios},
                     {"seed", config.seed},
                     {"balance", config.balance}};
  manifest.default_sources = {{"ratios", "design"}, {"seed", "design"}, {"balance", "design"}};
  if (!opt.non_vuln.empty()) manifest.inputs.push_back(opt.non_vuln);
  manifest.write(common.out);
  spdlog::info("split: {} samples assigned, {} dropped by balancing", rows.size(), dropped.size());
  return kExitOk;
}

int cmd_score(const Common& common, const ScoreOptions& opt) {
  require_file(opt.predictions);
  std::vector<PredictionRecord> predictions;
  std::set<std::string> seen;
  for_each_jsonl(opt.predictions, [&](std::size_t, const Json& j) {
    auto p = prediction_from_json(j);
    if (!seen.insert(p.unit_id).second) throw DuplicateUnitId(p.unit_id);
    predictions.push_back(std::move(p));
  });
  std::optional<std::map<std::string, Label, std::less<>>> labels;
  if (!opt.classifications.empty()) {
    labels.emplace();
    for (const auto& c : read_classifications(opt.classifications)) (*labels)[c.vuln_id] = c.label;
  }
  const auto report = score_predictions(predictions, labels ? &*labels : nullptr);
  prepare_out(common.out);
  write_json(common.out / "report.json", to_json(report));

  RunManifest manifest;
  manifest.subcommand = "score";
  manifest.config = {{"predictions", opt.predictions.string()},
                     {"classifications",
                      opt.classifications.empty() ? Json(nullptr) : Json(opt.classifications.string())}};
  manifest.inputs.push_back(opt.predictions);
  if (!opt.classifications.empty()) manifest.inputs.push_back(opt.classifications);
  manifest.outputs = {"report.json"};
  manifest.write(common.out);
  return kExitOk;
}

int cmd_stats(const Common& common, const StatsOptions& opt) {
  const auto stats = dataset_stats(read_classifications(opt.classifications));
  prepare_out(common.out);
  write_json(common.out / "stats.json", to_json(stats));
  RunManifest manifest;
  manifest.subcommand = "stats";
  manifest.config = {{"classifications", opt.classifications.string()}};
  manifest.inputs.push_back(opt.classifications);
  manifest.outputs = {"stats.json"};
  manifest.write(common.out);
  return kExitOk;
}

void init_logging(const std::string& level) {
  static auto logger = [] {
    auto l = spdlog::stderr_color_mt("patch_triage");
    l->set_pattern("[%l] %v");
    return l;
  }();
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(level));
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Curate vulnerability-patch datasets: collect, clean, classify, split, score, stats"};
  app.name("patch_triage");
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

  Common common;
  auto add_common = [&](CLI::App* sub, bool parallel) {
    sub->add_option("--out", common.out, "Output directory")->required();
    if (parallel) sub->add_option("--jobs", common.jobs, "Worker threads (0 = one per logical CPU)");
  };

  CollectOptions collect;
  auto* c = app.add_subcommand("collect", "Fetch patches and group their changes by base unit");
  c->add_option("metadata", collect.metadata, "Vulnerability metadata (JSONL)")->required();
  c->add_option("--diff-dir", collect.diff_dir, "Read <vuln_id>.diff files instead of repositories");
  c->add_option("--base-unit", collect.base_unit, "line or function")
      ->check(CLI::IsMember({"line", "function"}));
  c->add_flag("--clean", collect.clean, "Drop noise-only change groups");
  c->add_option("--rules", collect.rules, "Cleaner rules")->delimiter(',');
  add_common(c, true);

  CleanOptions clean;
  auto* cl = app.add_subcommand("clean", "Remove noise-only change groups");
  cl->add_option("groups", clean.groups, "Change groups (JSONL)")->required();
  cl->add_option("--rules", clean.rules, "Cleaner rules")->delimiter(',');
  add_common(cl, true);

  ClassifyOptions classify;
  auto* k = app.add_subcommand("classify", "Label vulnerabilities IBU, RepeatedIBU or MBU");
  k->add_option("groups", classify.groups, "Change groups (JSONL)")->required();
  k->add_option("--metadata", classify.metadata, "Metadata used to cross-check declared unit counts");
  k->add_option("--method", classify.method, "similarity or clustering")
      ->check(CLI::IsMember({"similarity", "clustering"}));
  k->add_option("--threshold", classify.threshold, "Minimum pairwise similarity for RepeatedIBU");
  k->add_option("--eps", classify.eps, "DBSCAN neighbourhood radius (distance)");
  k->add_option("--min-pts", classify.min_pts, "DBSCAN core-point size");
  k->add_option("--sim-norm", classify.sim_norm, "dice or max")->check(CLI::IsMember({"dice", "max"}));
  add_common(k, true);

  SplitOptions split;
  auto* s = app.add_subcommand("split", "Assign whole vulnerabilities to train/val/test, or audit a split");
  s->add_option("classifications", split.classifications, "Classifications (JSONL)")->required();
  s->add_option("--non-vuln", split.non_vuln, "Non-vulnerable samples (JSONL {sample_id, group?})");
  s->add_option("--ratios", split.ratios, "train,val,test fractions");
  s->add_option("--seed", split.seed, "Shuffle seed");
  s->add_flag("--balance", split.balance, "Down-sample training non-vulnerable samples");
  s->add_option("--verify", split.verify, "Audit a unit-level assignment (JSONL {sample_id, split})");
  add_common(s, false);

  ScoreOptions score;
  auto* sc = app.add_subcommand("score", "Base and adjusted detector metrics");
  sc->add_option("predictions", score.predictions, "Predictions (JSONL)")->required();
  sc->add_option("--classifications", score.classifications, "Classifications for IBU/MBU rates");
  add_common(sc, false);

  StatsOptions stats;
  auto* st = app.add_subcommand("stats", "Dataset statistics");
  st->add_option("classifications", stats.classifications, "Classifications (JSONL)")->required();
  add_common(st, false);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  init_logging(log_level);

  try {
    if (c->parsed()) return cmd_collect(common, collect);
    if (cl->parsed()) return cmd_clean(common, clean);
    if (k->parsed()) return cmd_classify(common, classify);
    if (s->parsed()) return cmd_split(common, split);
    if (sc->parsed()) return cmd_score(common, score);
    if (st->parsed()) return cmd_stats(common, stats);
  } catch (const CLI::ValidationError& e) {
    spdlog::error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace patch_triage::cli
