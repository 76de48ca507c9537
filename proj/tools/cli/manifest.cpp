#include "manifest.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "json.hpp"
#include "revision_eq/errors.hpp"
#include "revision_eq/io.hpp"

#ifndef REVISION_EQ_VERSION
#define REVISION_EQ_VERSION "0.0.0"
#endif

namespace revision_eq::cli {

const char* tool_version() { return REVISION_EQ_VERSION; }

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw InputError("sha256 digest failed");
  }
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["parameters"] = parameters;
  j["seed"] = seed;
  j["tool_version"] = tool_version;
  j["timestamp"] = timestamp;
  j["input_digests"] = input_digests;
  return j.dump(2) + "\n";
}

void write_manifest(RunManifest manifest, const std::vector<std::string>& input_paths,
                    const std::string& output_path) {
  manifest.tool_version = tool_version();
  manifest.timestamp = utc_timestamp();
  for (const auto& path : input_paths) {
    if (!path.empty() && std::filesystem::is_regular_file(path)) {
      manifest.input_digests[path] = sha256_hex(read_text_file(path));
    }
  }
  write_text_file(output_path + ".manifest.json", manifest.to_json());
}

}  // namespace revision_eq::cli
