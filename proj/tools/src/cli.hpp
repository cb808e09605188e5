// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sdoh::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kTransport = 3 };

/// Reproducibility record written next to every output as <out>.manifest.json.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> options;  // every parsed flag, by name
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string timestamp;  // UTC, ISO 8601
  std::string tool_version;

  /// FNV-1a over command and options; independent of timestamp and paths' content.
  std::string config_hash() const;
  std::string to_json() const;
};

std::string utc_timestamp();
void write_manifest(const RunManifest& m, const std::string& output_path);

/// Runs one invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdoh::cli
