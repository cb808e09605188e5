// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "sdoh/errors.hpp"
#include "sdoh/random.hpp"

namespace sdoh::cli {

std::string RunManifest::config_hash() const {
  std::uint64_t h = fnv1a(command);
  for (const auto& [k, v] : options) {
    h = fnv1a("\x1f" + k + "=" + v, h);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["config_hash"] = config_hash();
  j["options"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : options) j["options"][k] = v;
  j["seeds"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : seeds) j["seeds"][k] = v;
  j["inputs"] = inputs;
  j["outputs"] = outputs;
  j["timestamp"] = timestamp;
  return j.dump(2) + "\n";
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const RunManifest& m, const std::string& output_path) {
  const std::string path = output_path + ".manifest.json";
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write " + path);
  f << m.to_json();
}

}  // namespace sdoh::cli
