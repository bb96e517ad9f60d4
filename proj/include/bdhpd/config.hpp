#ifndef BDHPD_CONFIG_HPP
#define BDHPD_CONFIG_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bdhpd/losses.hpp"
#include "bdhpd/synth.hpp"
#include "bdhpd/trainer.hpp"

namespace bdhpd {

// Fully-resolved run configuration: a flat object of dotted keys over the
// per-module configs. Unknown keys are rejected; every artifact-producing
// run writes the resolved object next to its outputs so any result can be
// reproduced from that file plus the seed.
struct RunSettings {
  ModelConfig model;
  WaveletConfig wavelet;
  FrameConfig frame;
  ContrastiveConfig loss;
  TrainConfig train;
  SynthConfig synth;
  std::string ablate;        // comma-separated components removed at train time
  std::string data_dir;      // corpus directory
  std::string eval_checkpoint;
  std::string eval_split = "test";
  double eval_threshold = 0.5;
  bool eval_speaker_vote = false;
  std::string export_task = "ddk"; // ddk | continuous | all
  std::size_t gradcheck_seeds = 20;

  std::vector<std::string> ablate_components() const;
};

// defaults -> optional config file (flat JSON object) -> key=value overrides
RunSettings load_settings(const std::optional<std::filesystem::path>& config_path,
                          const std::vector<std::string>& overrides);

void apply_override(RunSettings& s, const std::string& keyval);

std::string resolved_config_json(const RunSettings& s); // sorted flat object
void write_resolved_config(const std::filesystem::path& path, const RunSettings& s);

} // namespace bdhpd

#endif
