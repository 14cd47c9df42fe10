#include "cfid/manifest.hpp"

#include <ctime>
#include <fstream>
#include <sstream>

#include "cfid/common.hpp"
#include "json.hpp"

namespace cfid {

void RunManifest::check_paths() const {
  for (const auto& [role, p] : paths) {
    if (!std::filesystem::exists(p)) {
      throw Error("manifest " + role + " path does not exist: " + p);
    }
  }
}

std::string RunManifest::to_json() const {
  nlohmann::json j;
  j["command"] = command;
  j["version"] = version;
  j["created"] = created;
  j["paths"] = paths;
  j["seeds"] = seeds;
  j["config"] = config;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.created = j.value("created", "");
    m.paths = j.at("paths").get<std::map<std::string, std::string>>();
    m.seeds = j.at("seeds").get<std::map<std::string, std::uint64_t>>();
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  manifest.check_paths();
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << manifest.to_json();
}

RunManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return RunManifest::from_json(ss.str());
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace cfid
