#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "patch_triage/change_group.hpp"
#include "patch_triage/classifier.hpp"
#include "patch_triage/metrics.hpp"
#include "patch_triage/splitter.hpp"

namespace patch_triage {

using Json = nlohmann::ordered_json;

/// Calls `fn(line_no, value)` for every non-blank line. Invalid JSON, and
/// any Error thrown by `fn` that is not already a MalformedRecord, become
/// MalformedRecord with the 1-based line number.
void for_each_jsonl(std::istream& in, const std::function<void(std::size_t, const Json&)>& fn);
void for_each_jsonl(const std::filesystem::path& path, const std::function<void(std::size_t, const Json&)>& fn);

Json to_json(const EditAction& action);
Json to_json(const EditScript& script);
EditScript edit_script_from_json(const Json& j);

struct GroupRecord {
  std::string vuln_id;
  ChangeGroup group;
};

/// {vuln_id, unit_kind, unit_id, before, after, encoded_script, script}
Json to_json(const GroupRecord& record);
GroupRecord group_record_from_json(const Json& j);

/// {vuln_id, base_unit, n_units, label, min_similarity, min_pair, method,
///  config, units, clusters, noise}
Json to_json(const ClassificationResult& result, UnitKind base_unit, const ClassifierConfig& config);
ClassificationResult classification_from_json(const Json& j);

PredictionRecord prediction_from_json(const Json& j);
Json to_json(const PredictionRecord& record);

Json to_json(const ConfusionCounts& counts);
/// {TPR:{base,adjusted,ibu,mbu}, Prec:{base,adjusted}, MCC:{base,adjusted},
///  counts:{base,adjusted}}; undefined rates are null.
Json to_json(const MetricsReport& report);
Json to_json(const DatasetStats& stats);
Json to_json(const SplitViolation& violation);

/// Throws Error (the caller adds the line number) on a missing or mistyped
/// field.
const Json& require(const Json& j, const char* key);
std::string require_string(const Json& j, const char* key);

}  // namespace patch_triage
