#include "patch_triage/vulnerability.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "patch_triage/error.hpp"

namespace patch_triage {

bool is_hex_hash(const std::string& text) {
  return !text.empty() &&
         std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isxdigit(c) != 0; });
}

namespace {

VulnerabilityRecord record_from_json(const nlohmann::json& j, std::size_t line_no,
                                     const MetadataOptions& options) {
  if (!j.is_object()) throw MalformedRecord(line_no, "expected a JSON object");
  VulnerabilityRecord r;
  auto it = j.find("vuln_id");
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw MalformedRecord(line_no, "missing or invalid 'vuln_id'");
  }
  r.vuln_id = it->get<std::string>();

  it = j.find("repo");
  if (it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw MalformedRecord(line_no, "'repo' must be a string");
    r.repo = it->get<std::string>();
  }
  if (options.require_repo && r.repo.empty()) throw MalformedRecord(line_no, "missing 'repo'");

  it = j.find("patch_hashes");
  if (it == j.end() || !it->is_array() || it->empty()) {
    throw MalformedRecord(line_no, "'patch_hashes' must be a non-empty array");
  }
  for (const auto& h : *it) {
    if (!h.is_string() || !is_hex_hash(h.get<std::string>())) {
      throw MalformedRecord(line_no, "'patch_hashes' entries must be hex strings");
    }
    r.patch_hashes.push_back(h.get<std::string>());
  }

  it = j.find("cve_id");
  if (it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw MalformedRecord(line_no, "'cve_id' must be a string");
    r.cve_id = it->get<std::string>();
  }
  it = j.find("declared_unit_count");
  if (it != j.end() && !it->is_null()) {
    if (!it->is_number_unsigned() && !(it->is_number_integer() && it->get<long long>() >= 0)) {
      throw MalformedRecord(line_no, "'declared_unit_count' must be a non-negative integer");
    }
    r.declared_unit_count = it->get<std::size_t>();
  }
  return r;
}

}  // namespace

std::vector<VulnerabilityRecord> parse_metadata(std::istream& in, const MetadataOptions& options) {
  std::vector<VulnerabilityRecord> out;
  std::set<std::string, std::less<>> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw MalformedRecord(line_no, std::string("invalid JSON: ") + e.what());
    }
    auto record = record_from_json(j, line_no, options);
    if (!seen.insert(record.vuln_id).second) throw DuplicateVulnId(record.vuln_id);
    out.push_back(std::move(record));
  }
  return out;
}

std::vector<VulnerabilityRecord> load_metadata(const std::filesystem::path& path,
                                               const MetadataOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open metadata file '" + path.string() + "'");
  return parse_metadata(in, options);
}

}  // namespace patch_triage
