#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <chrono>
#include <fstream>
#include <memory>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "patch_triage/error.hpp"
#include "patch_triage/version.hpp"

namespace patch_triage::cli {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path.string() + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("SHA-256 unavailable");
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), digest.data(), &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

Json RunManifest::to_json() const {
  Json inputs_json = Json::array();
  for (const auto& p : inputs) {
    inputs_json.push_back(Json{{"path", p.string()}, {"sha256", sha256_file(p)}});
  }
  const auto now = std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
  Json j;
  j["tool"] = "patch_triage";
  j["version"] = kVersion;
  j["subcommand"] = subcommand;
  j["config"] = config;
  j["default_sources"] = default_sources;
  j["inputs"] = std::move(inputs_json);
  j["outputs"] = outputs;
  j["timestamp"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
  return j;
}

void RunManifest::write(const std::filesystem::path& out_dir) const {
  std::ofstream out(out_dir / (subcommand + ".manifest.json"));
  if (!out) throw Error("cannot write manifest under '" + out_dir.string() + "'");
  out << to_json().dump(2) << '\n';
}

}  // namespace patch_triage::cli
