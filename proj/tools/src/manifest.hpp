#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "patch_triage/serialization.hpp"

namespace patch_triage::cli {

/// Hex SHA-256 of a file's bytes. Throws Error when it cannot be read.
std::string sha256_file(const std::filesystem::path& path);

/// Reproducibility record written next to every subcommand's outputs as
/// `<subcommand>.manifest.json`.
struct RunManifest {
  std::string subcommand;
  Json config = Json::object();
  /// Option name -> "published" (value taken from the published method) or
  /// "design" (value chosen for this tool).
  Json default_sources = Json::object();
  std::vector<std::filesystem::path> inputs;
  std::vector<std::string> outputs;

  Json to_json() const;
  void write(const std::filesystem::path& out_dir) const;
};

}  // namespace patch_triage::cli
