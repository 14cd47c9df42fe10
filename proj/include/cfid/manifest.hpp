#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace cfid {

inline constexpr const char* kToolVersion = "0.1.0";

/// What a CLI run read and wrote. Paths are keyed by role ("dataset",
/// "config", "coefficients", "report", ...).
struct RunManifest {
  std::string command;
  std::string version = kToolVersion;
  std::map<std::string, std::string> paths;
  std::map<std::string, std::uint64_t> seeds;
  std::map<std::string, std::string> config;  // effective settings
  std::string created;                        // UTC, ISO 8601

  /// Throws Error naming the first referenced path that does not exist.
  void check_paths() const;
  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
};

/// Checks the paths, then writes JSON.
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

std::string utc_timestamp();

}  // namespace cfid
