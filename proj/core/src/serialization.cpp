#include "patch_triage/serialization.hpp"

#include <fstream>

#include "patch_triage/error.hpp"

namespace patch_triage {

void for_each_jsonl(std::istream& in, const std::function<void(std::size_t, const Json&)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::exception& e) {
      throw MalformedRecord(line_no, std::string("invalid JSON: ") + e.what());
    }
    try {
      fn(line_no, j);
    } catch (const MalformedRecord&) {
      throw;
    } catch (const Json::exception& e) {
      throw MalformedRecord(line_no, e.what());
    } catch (const Error& e) {
      throw MalformedRecord(line_no, e.what());
    }
  }
}

void for_each_jsonl(const std::filesystem::path& path, const std::function<void(std::size_t, const Json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  for_each_jsonl(in, fn);
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object()) throw Error("expected a JSON object");
  const auto it = j.find(key);
  if (it == j.end()) throw Error(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_string()) throw Error(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

namespace {

template <typename T>
Json nullable(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

std::optional<std::string> optional_string(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw Error(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

bool require_bool(const Json& j, const char* key) {
  const Json& v = require(j, key);
  if (!v.is_boolean()) throw Error(std::string("field '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::vector<std::string> string_list(const Json& v, const char* key) {
  if (!v.is_array()) throw Error(std::string("field '") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw Error(std::string("field '") + key + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

}  // namespace

Json to_json(const EditAction& a) {
  Json j;
  j["kind"] = to_string(a.kind);
  j["node_type"] = a.node_type;
  j["label"] = nullable(a.label);
  if (a.kind == ActionKind::Update) j["old_label"] = nullable(a.old_label);
  if (a.kind == ActionKind::Insert || a.kind == ActionKind::Move) {
    j["parent_type"] = nullable(a.parent_type);
    j["position"] = a.position;
  }
  j["node"] = a.node;
  j["parent"] = a.parent;
  return j;
}

Json to_json(const EditScript& script) {
  Json actions = Json::array();
  for (const auto& a : script.actions) actions.push_back(to_json(a));
  return Json{{"actions", std::move(actions)}};
}

EditScript edit_script_from_json(const Json& j) {
  EditScript script;
  for (const auto& a : require(j, "actions")) {
    EditAction action;
    action.kind = action_kind_from_string(require_string(a, "kind"));
    action.node_type = require_string(a, "node_type");
    action.label = optional_string(a, "label");
    action.old_label = optional_string(a, "old_label");
    action.parent_type = optional_string(a, "parent_type");
    action.position = a.value("position", std::size_t{0});
    action.node = a.value("node", ScriptNodeId{0});
    action.parent = a.value("parent", kScriptRoot);
    script.actions.push_back(std::move(action));
  }
  return script;
}

Json to_json(const GroupRecord& r) {
  Json j;
  j["vuln_id"] = r.vuln_id;
  j["unit_kind"] = to_string(r.group.unit.kind);
  j["unit_id"] = r.group.unit.id;
  j["before"] = r.group.before_snippet;
  j["after"] = r.group.after_snippet;
  j["encoded_script"] = r.group.encoded;
  j["script"] = r.group.script ? to_json(*r.group.script) : Json(nullptr);
  return j;
}

GroupRecord group_record_from_json(const Json& j) {
  GroupRecord r;
  r.vuln_id = require_string(j, "vuln_id");
  r.group.unit.kind = unit_kind_from_string(require_string(j, "unit_kind"));
  r.group.unit.id = require_string(j, "unit_id");
  r.group.before_snippet = optional_string(j, "before").value_or("");
  r.group.after_snippet = optional_string(j, "after").value_or("");
  r.group.encoded = string_list(require(j, "encoded_script"), "encoded_script");
  if (const auto it = j.find("script"); it != j.end() && !it->is_null()) {
    r.group.script = edit_script_from_json(*it);
  }
  return r;
}

Json to_json(const ClassificationResult& r, UnitKind base_unit, const ClassifierConfig& config) {
  Json j;
  j["vuln_id"] = r.vuln_id;
  j["base_unit"] = to_string(base_unit);
  j["n_units"] = r.n_units;
  j["label"] = to_string(r.label);
  j["min_similarity"] = nullable(r.min_similarity);
  j["min_pair"] = r.min_pair ? Json::array({r.min_pair->first, r.min_pair->second}) : Json(nullptr);
  j["method"] = to_string(r.method);
  Json cfg;
  cfg["threshold"] = config.threshold;
  cfg["eps"] = config.eps;
  cfg["min_pts"] = config.min_pts;
  cfg["sim_norm"] = to_string(config.norm);
  j["config"] = std::move(cfg);
  j["units"] = r.units;
  if (r.clustering) {
    j["clusters"] = r.clustering->clusters;
    j["noise"] = r.clustering->noise;
  }
  return j;
}

ClassificationResult classification_from_json(const Json& j) {
  ClassificationResult r;
  r.vuln_id = require_string(j, "vuln_id");
  r.label = label_from_string(require_string(j, "label"));
  const Json& n = require(j, "n_units");
  if (!n.is_number_unsigned()) throw Error("field 'n_units' must be a non-negative integer");
  r.n_units = n.get<std::size_t>();
  if (const auto m = optional_string(j, "method")) r.method = method_from_string(*m);
  if (const auto it = j.find("min_similarity"); it != j.end() && it->is_number()) r.min_similarity = it->get<double>();
  if (const auto it = j.find("min_pair"); it != j.end() && it->is_array() && it->size() == 2) {
    r.min_pair = UnitPair{(*it)[0].get<std::string>(), (*it)[1].get<std::string>()};
  }
  if (const auto it = j.find("units"); it != j.end()) r.units = string_list(*it, "units");
  if (const auto it = j.find("clusters"); it != j.end() && it->is_array()) {
    Clustering c;
    for (const auto& cluster : *it) c.clusters.push_back(string_list(cluster, "clusters"));
    if (const auto noise = j.find("noise"); noise != j.end()) c.noise = string_list(*noise, "noise");
    r.clustering = std::move(c);
  }
  return r;
}

PredictionRecord prediction_from_json(const Json& j) {
  PredictionRecord r;
  r.unit_id = require_string(j, "unit_id");
  r.vuln_id = optional_string(j, "vuln_id");
  r.true_label = require_bool(j, "true_label");
  r.predicted_label = require_bool(j, "predicted_label");
  if (r.vuln_id && !r.true_label) throw Error("a record with vuln_id must have true_label = true");
  return r;
}

Json to_json(const PredictionRecord& r) {
  Json j;
  j["unit_id"] = r.unit_id;
  if (r.vuln_id) j["vuln_id"] = *r.vuln_id;
  j["true_label"] = r.true_label;
  j["predicted_label"] = r.predicted_label;
  return j;
}

Json to_json(const ConfusionCounts& c) {
  return Json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

Json to_json(const MetricsReport& r) {
  Json j;
  j["TPR"] = Json{{"base", nullable(r.base.tpr)},
                  {"adjusted", nullable(r.adjusted.tpr)},
                  {"ibu", nullable(r.tpr_ibu)},
                  {"mbu", nullable(r.tpr_mbu)}};
  j["Prec"] = Json{{"base", nullable(r.base.precision)}, {"adjusted", nullable(r.adjusted.precision)}};
  j["MCC"] = Json{{"base", nullable(r.base.mcc)}, {"adjusted", nullable(r.adjusted.mcc)}};
  j["counts"] = Json{{"base", to_json(r.base_counts)}, {"adjusted", to_json(r.adjusted_counts)}};
  return j;
}

Json to_json(const DatasetStats& s) {
  Json hist = Json::object();
  for (const auto& [units, count] : s.units_histogram) hist[std::to_string(units)] = count;
  Json j;
  j["n_vulns"] = s.n_vulns;
  j["n_units"] = s.n_units;
  j["n_ibu"] = s.n_ibu;
  j["n_repeated_ibu"] = s.n_repeated_ibu;
  j["n_mbu"] = s.n_mbu;
  j["n_mbu_units"] = s.n_mbu_units;
  j["pct_mbu"] = nullable(s.pct_mbu);
  j["pct_non_mbu"] = nullable(s.pct_non_mbu);
  j["pct_mbu_units"] = nullable(s.pct_mbu_units);
  j["units_histogram"] = std::move(hist);
  return j;
}

Json to_json(const SplitViolation& v) {
  Json touched = Json::array();
  Json per_split = Json::object();
  for (Split s : v.splits_touched) touched.push_back(to_string(s));
  for (const auto& [s, count] : v.units_per_split) per_split[std::string(to_string(s))] = count;
  return Json{{"vuln_id", v.vuln_id}, {"splits_touched", std::move(touched)}, {"units_per_split", std::move(per_split)}};
}

}  // namespace patch_triage
