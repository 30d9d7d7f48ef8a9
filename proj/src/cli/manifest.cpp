// SPDX-License-Identifier: Apache-2.0
#include "gfnm/cli/manifest.hpp"

#include <json.hpp>

#include "gfnm/errors.hpp"
#include "gfnm/io/binary.hpp"

#ifndef GFNM_VERSION
#define GFNM_VERSION "0.0.0"
#endif
#ifndef GFNM_REVISION
#define GFNM_REVISION "unknown"
#endif

namespace gfnm::cli {

using nlohmann::json;

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.push_back({path.string(), io::sha256_file(path)});
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs.push_back({path.string(), io::sha256_file(path)});
}

std::string code_version() { return std::string(GFNM_VERSION) + "+" + GFNM_REVISION; }

namespace {

json digests(const std::vector<FileDigest>& v) {
  json a = json::array();
  for (const auto& d : v) a.push_back({{"path", d.path}, {"sha256", d.sha256}});
  return a;
}

std::vector<FileDigest> read_digests(const json& a) {
  std::vector<FileDigest> out;
  for (const auto& d : a) out.push_back({d.at("path").get<std::string>(), d.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

std::string to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["code_version"] = m.code_version;
  j["config"] = m.config;
  j["seed"] = m.seed;
  j["arguments"] = m.arguments;
  j["inputs"] = digests(m.inputs);
  j["outputs"] = digests(m.outputs);
  json t = json::array();
  for (const auto& x : m.timings) t.push_back({{"name", x.name}, {"seconds", x.seconds}});
  j["timings"] = t;
  return j.dump(2) + "\n";
}

RunManifest parse_manifest(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.code_version = j.at("code_version").get<std::string>();
    m.config = j.at("config").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.arguments = j.at("arguments").get<std::vector<std::string>>();
    m.inputs = read_digests(j.at("inputs"));
    m.outputs = read_digests(j.at("outputs"));
    for (const auto& t : j.at("timings"))
      m.timings.push_back({t.at("name").get<std::string>(), t.at("seconds").get<double>()});
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("manifest: ") + e.what());
  }
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  io::write_file_atomic(path, to_json(manifest));
}

RunManifest read_manifest(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  return parse_manifest(std::string(bytes.begin(), bytes.end()));
}

std::vector<std::string> verify_outputs(const RunManifest& manifest) {
  std::vector<std::string> bad;
  for (const auto& d : manifest.outputs) {
    std::error_code ec;
    if (!std::filesystem::exists(d.path, ec) || io::sha256_file(d.path) != d.sha256)
      bad.push_back(d.path);
  }
  return bad;
}

}  // namespace gfnm::cli
