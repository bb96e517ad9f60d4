#ifndef BDHPD_CHECKPOINT_HPP
#define BDHPD_CHECKPOINT_HPP

#include <filesystem>

#include "bdhpd/framing.hpp"
#include "bdhpd/model.hpp"
#include "bdhpd/params.hpp"
#include "bdhpd/wavelet.hpp"

namespace bdhpd {

// Everything needed to rebuild the exact inference graph: parameters with
// their identifiers and shapes, the model/featurization configuration, the
// ablation switches the graph was built with, and the language registry.
struct Checkpoint {
  ModelConfig model;
  WaveletConfig wavelet;
  FrameConfig frame;
  Ablation ablation;
  LanguageRegistry languages;
  ParamStore<float> params;
};

// Binary layout: magic "BDHPD1", uint32 LE JSON header length, JSON header,
// then the raw float32 LE parameter values in header order. Bitwise
// reproducible for identical contents.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace bdhpd

#endif
