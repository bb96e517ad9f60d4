#ifndef BDHPD_SYNTH_HPP
#define BDHPD_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bdhpd/framing.hpp"
#include "bdhpd/manifest.hpp"

namespace bdhpd {

// Deterministic bilingual corpus: two synthetic datasets ("synthA"
// imbalanced, "synthB" balanced) whose SSL feature matrices carry
//   - a shared PD signature on a fixed dim block: a constant offset plus
//     a within-pair coherence pattern whose sign encodes (label, task), so
//     part of the class evidence survives per-utterance standardization,
//   - a DDK-task baseline offset on that same block whose SIGN FLIPS between
//     languages (the interaction a single shared head cannot absorb
//     linearly, while per-task heads plus language conditioning can),
//   - a language-independent DDK marker block,
//   - per-language shift and scale blocks (the domain gap),
// and whose DDK audio is a syllable pulse train with jitter, amplitude
// instability, pulse dropouts and a slower rate under PD, so wavelet
// detail-band statistics see the motor degradation. The dim layout is
// emitted next to the corpus as dim_map.json.
struct SynthConfig {
  std::uint64_t seed = 7;
  std::size_t d_ssl = 64;
  std::size_t utt_continuous = 4;
  std::size_t utt_ddk = 4;
  double cont_seconds = 5.0;
  double ddk_seconds = 3.0;
  int sample_rate = 16000;
  std::size_t speakers_a_hc = 30;
  std::size_t speakers_a_pd = 12;
  std::size_t speakers_b_hc = 20;
  std::size_t speakers_b_pd = 20;
  double pd_effect = 0.65;   // SSL shift on the PD dims; also scales the DDK
                            // motor degradation (0 removes the label signal
                            // entirely)
  double task_effect = 0.8; // DDK offset on the PD dims, sign +1 in A, -1 in B
  double task_marker = 0.8; // DDK offset on the task dims, both languages
  double lang_shift = 1.2;  // offset on each language's own shift dims
  double lang_scale = 1.5;  // language B scale on the PD+task dims
  FrameConfig frame;

  void validate() const;
};

struct SynthSummary {
  std::size_t train_utterances = 0;
  std::size_t val_utterances = 0;
  std::size_t test_utterances = 0;
};

// Writes manifest_{train,val,test}.jsonl, features/*.ftrx, audio/*.wav and
// dim_map.json under out_dir. Same config => byte-identical tree.
SynthSummary generate_synthetic_corpus(const SynthConfig& cfg,
                                       const std::filesystem::path& out_dir);

} // namespace bdhpd

#endif
