#ifndef BDHPD_MANIFEST_HPP
#define BDHPD_MANIFEST_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "bdhpd/errors.hpp"

namespace bdhpd {

enum class TaskType { DDK, ContinuousSpeech };

TaskType task_from_string(const std::string& s);
std::string to_string(TaskType t);

// One utterance record. Paths are stored as written (usually relative to the
// manifest's directory; resolve_path joins them).
struct ManifestEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::string dataset;
  TaskType task = TaskType::ContinuousSpeech;
  int label = 0; // HC=0, PD=1
  std::string audio_path;       // optional
  std::string ssl_feature_path; // optional, but at least one path must be set

  void validate() const;
};

// Line-delimited flat JSON objects, one entry per line. Rejects unknown
// keys, missing required keys (with the line number), and duplicate
// utterance ids.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path,
                    const std::vector<ManifestEntry>& entries);

std::filesystem::path resolve_path(const std::filesystem::path& manifest_path,
                                   const std::string& stored);

} // namespace bdhpd

#endif
