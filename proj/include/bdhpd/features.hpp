#ifndef BDHPD_FEATURES_HPP
#define BDHPD_FEATURES_HPP

#include <optional>

#include "bdhpd/framing.hpp"
#include "bdhpd/tensor.hpp"
#include "bdhpd/wavelet.hpp"

namespace bdhpd {

enum class FeatureKind { ssl, wavelet, fused };

struct FeatureSequence {
  FeatureKind kind = FeatureKind::ssl;
  TensorF matrix; // [T x D]
};

// Frame the waveform and compute per-frame wavelet statistics.
FeatureSequence wavelet_sequence(const Waveform& w, const FrameConfig& fc,
                                 const WaveletConfig& wc);

// Per-stream layer normalization followed by frame-wise concatenation.
// Sequences of different length are truncated to the shorter one. norm
// gains/biases default to 1/0 (the learned ones live in the model; this
// eager path is the features-module contract used by tooling and tests).
struct FusionNorm {
  std::optional<TensorF> ssl_gain, ssl_bias, wav_gain, wav_bias;
  double eps = 1e-8;
};

FeatureSequence fuse(const FeatureSequence& ssl, const FeatureSequence& wav,
                     const FusionNorm& norm = {});

// Plain layer norm over the last axis (shared by fuse and the tests).
TensorF layer_norm_rows(const TensorF& x, const TensorF* gain, const TensorF* bias,
                        double eps);

} // namespace bdhpd

#endif
