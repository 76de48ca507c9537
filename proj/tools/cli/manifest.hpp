#pragma once

#include <map>
#include <string>
#include <vector>

namespace revision_eq::cli {

/// Provenance written next to every output file as `<output>.manifest.json`.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> parameters;
  unsigned long long seed = 0;
  std::string tool_version;
  std::string timestamp;
  /// Input path -> SHA-256 hex digest.
  std::map<std::string, std::string> input_digests;

  std::string to_json() const;
};

std::string sha256_hex(const std::string& bytes);
std::string utc_timestamp();
const char* tool_version();

/// Fills version and timestamp, digests every existing input file, and writes
/// the manifest beside `output_path`.
void write_manifest(RunManifest manifest, const std::vector<std::string>& input_paths,
                    const std::string& output_path);

}  // namespace revision_eq::cli
