// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace gfnm::cli {

struct FileDigest {
  std::string path;
  std::string sha256;
  bool operator==(const FileDigest&) const = default;
};

struct Timing {
  std::string name;
  double seconds = 0.0;
  bool operator==(const Timing&) const = default;
};

/// Record of one command run: what went in, what came out, and how to redo it.
struct RunManifest {
  std::string command;
  std::string code_version;
  std::string config;  // full config text after overrides
  std::uint64_t seed = 0;
  std::vector<std::string> arguments;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  std::vector<Timing> timings;
  bool operator==(const RunManifest&) const = default;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
};

std::string code_version();

std::string to_json(const RunManifest& manifest);
/// Throws DataError on malformed JSON or missing fields.
RunManifest parse_manifest(const std::string& text);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

/// Paths whose current hash differs from the record (missing files included).
std::vector<std::string> verify_outputs(const RunManifest& manifest);

}  // namespace gfnm::cli
