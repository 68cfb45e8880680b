#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "restake/core/error.hpp"
#include "restake/core/hash.hpp"
#include "restake/core/io.hpp"

namespace restake::interface {

inline constexpr const char* kEngineVersion = "0.1.0";

/// Everything that determines a run's artifacts. Output location and the
/// offline toggle are not part of it.
struct RunManifest {
  std::string command;
  std::vector<std::string> config_paths;
  std::map<std::string, std::uint64_t> seeds;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::string engine_version = kEngineVersion;
  std::map<std::string, std::string> input_hashes;  ///< path as given -> sha256
  std::string timestamp = "1970-01-01T00:00:00Z";

  void add_input(const std::filesystem::path& path) { input_hashes[path.string()] = sha256_hex(read_file(path)); }

  void add_config(const std::filesystem::path& path) {
    config_paths.push_back(path.string());
    add_input(path);
  }
};

inline std::string iso_utc(std::int64_t epoch_seconds) {
  const std::time_t t = static_cast<std::time_t>(epoch_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// `explicit_epoch`, else SOURCE_DATE_EPOCH, else the Unix epoch.
inline std::string manifest_timestamp(std::optional<std::int64_t> explicit_epoch = std::nullopt) {
  if (explicit_epoch) return iso_utc(*explicit_epoch);
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end == env || *end != '\0') throw ValidationError("SOURCE_DATE_EPOCH must be an integer");
    return iso_utc(v);
  }
  return iso_utc(0);
}

inline nlohmann::ordered_json to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config_paths"] = m.config_paths;
  j["seeds"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.seeds) j["seeds"][k] = v;
  j["parameters"] = m.parameters;
  j["engine_version"] = m.engine_version;
  j["input_hashes"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m.input_hashes) j["input_hashes"][k] = v;
  j["timestamp"] = m.timestamp;
  return j;
}

/// Stable identifier of a manifest: sha256 of its compact JSON.
inline std::string manifest_id(const RunManifest& m) { return sha256_hex(to_json(m).dump()); }

}  // namespace restake::interface
