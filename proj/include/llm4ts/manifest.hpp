#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "llm4ts/config.hpp"
#include "llm4ts/util.hpp"
#include "llm4ts/version.hpp"

namespace llm4ts {

// Written alongside every output file so any result is reproducible from its
// manifest: resolved config, seeds, corpus checksum and tool version. The
// endpoint is identified by model name only; the key is never recorded.
struct RunManifest {
  std::string tool_version = kVersion;
  std::string command;
  std::string created_utc;
  nlohmann::ordered_json config;
  nlohmann::ordered_json seeds;
  nlohmann::ordered_json args;  // command-specific settings needed to re-run
  std::string corpus_checksum;
  std::string endpoint_model;
  std::vector<std::string> outputs;
};

inline nlohmann::ordered_json manifest_to_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool_version"] = m.tool_version;
  j["command"] = m.command;
  j["created_utc"] = m.created_utc;
  j["config"] = m.config;
  j["seeds"] = m.seeds;
  j["args"] = m.args;
  j["corpus_checksum"] = m.corpus_checksum;
  j["endpoint_model"] = m.endpoint_model;
  j["outputs"] = m.outputs;
  return j;
}

inline RunManifest manifest_from_json(const nlohmann::json& j) {
  RunManifest m;
  m.tool_version = j.value("tool_version", std::string());
  m.command = j.value("command", std::string());
  m.created_utc = j.value("created_utc", std::string());
  if (j.contains("config")) m.config = j["config"];
  if (j.contains("seeds")) m.seeds = j["seeds"];
  if (j.contains("args")) m.args = j["args"];
  m.corpus_checksum = j.value("corpus_checksum", std::string());
  m.endpoint_model = j.value("endpoint_model", std::string());
  if (j.contains("outputs")) j["outputs"].get_to(m.outputs);
  return m;
}

inline RunManifest load_manifest(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest " + path.string() + " is not valid JSON: " + e.what());
  }
  return manifest_from_json(doc);
}

inline void write_manifest(const std::filesystem::path& path, const RunManifest& m) {
  write_text_file(path, manifest_to_json(m).dump(2) + "\n");
}

inline std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p += ".manifest.json";
  return p;
}

}  // namespace llm4ts
