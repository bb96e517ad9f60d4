#include "bdhpd/manifest.hpp"

#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace bdhpd {

using nlohmann::json;

TaskType task_from_string(const std::string& s) {
  if (s == "ddk") return TaskType::DDK;
  if (s == "continuous") return TaskType::ContinuousSpeech;
  throw ParseError("task: expected 'ddk' or 'continuous', got '" + s + "'");
}

std::string to_string(TaskType t) {
  return t == TaskType::DDK ? "ddk" : "continuous";
}

void ManifestEntry::validate() const {
  if (utterance_id.empty()) throw ParseError("manifest entry: empty utterance_id");
  if (speaker_id.empty()) throw ParseError("manifest entry: empty speaker_id");
  if (dataset.empty()) throw ParseError("manifest entry: empty dataset");
  if (label != 0 && label != 1)
    throw ParseError("manifest entry " + utterance_id + ": label must be 0 or 1, got " +
                     std::to_string(label));
  if (audio_path.empty() && ssl_feature_path.empty())
    throw ParseError("manifest entry " + utterance_id + ": no payload path present");
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("manifest: cannot open " + path.string());
  std::vector<ManifestEntry> entries;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("manifest " + path.string() + ":" + std::to_string(lineno) + ": " +
                       e.what());
    }
    if (!j.is_object())
      throw ParseError("manifest " + path.string() + ":" + std::to_string(lineno) +
                       ": line is not an object");
    static const std::unordered_set<std::string> known = {
        "utterance_id", "speaker_id", "dataset", "task",
        "label",        "audio_path", "ssl_feature_path"};
    for (const auto& [key, _] : j.items())
      if (!known.count(key))
        throw ParseError("manifest " + path.string() + ":" + std::to_string(lineno) +
                         ": unknown key '" + key + "'");
    auto require = [&](const char* key) -> const json& {
      auto it = j.find(key);
      if (it == j.end())
        throw ParseError("manifest " + path.string() + ":" + std::to_string(lineno) +
                         ": missing key '" + std::string(key) + "'");
      return *it;
    };
    ManifestEntry e;
    try {
      e.utterance_id = require("utterance_id").get<std::string>();
      e.speaker_id = require("speaker_id").get<std::string>();
      e.dataset = require("dataset").get<std::string>();
      e.task = task_from_string(require("task").get<std::string>());
      e.label = require("label").get<int>();
      if (j.contains("audio_path")) e.audio_path = j["audio_path"].get<std::string>();
      if (j.contains("ssl_feature_path"))
        e.ssl_feature_path = j["ssl_feature_path"].get<std::string>();
    } catch (const json::exception& ex) {
      throw ParseError("manifest " + path.string() + ":" + std::to_string(lineno) + ": " +
                       ex.what());
    }
    e.validate();
    if (!seen.insert(e.utterance_id).second)
      throw ParseError("manifest " + path.string() + ": duplicate utterance_id '" +
                       e.utterance_id + "' at line " + std::to_string(lineno));
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ParseError("manifest: cannot write " + path.string());
  for (const ManifestEntry& e : entries) {
    json j;
    j["utterance_id"] = e.utterance_id;
    j["speaker_id"] = e.speaker_id;
    j["dataset"] = e.dataset;
    j["task"] = to_string(e.task);
    j["label"] = e.label;
    if (!e.audio_path.empty()) j["audio_path"] = e.audio_path;
    if (!e.ssl_feature_path.empty()) j["ssl_feature_path"] = e.ssl_feature_path;
    os << j.dump() << "\n";
  }
}

std::filesystem::path resolve_path(const std::filesystem::path& manifest_path,
                                   const std::string& stored) {
  const std::filesystem::path p(stored);
  if (p.is_absolute()) return p;
  return manifest_path.parent_path() / p;
}

} // namespace bdhpd
