#include "bdhpd/features.hpp"

#include <cmath>

#include "bdhpd/errors.hpp"

namespace bdhpd {

FeatureSequence wavelet_sequence(const Waveform& w, const FrameConfig& fc,
                                 const WaveletConfig& wc) {
  const auto frames = frame_signal(w, fc);
  const std::size_t d = wavelet_feature_dim(wc);
  TensorF m = TensorF::zeros({frames.size(), d});
  for (std::size_t t = 0; t < frames.size(); ++t) {
    const std::vector<double> stats = wavelet_features(frames[t], wc);
    for (std::size_t j = 0; j < d; ++j) m(t, j) = static_cast<float>(stats[j]);
  }
  return {FeatureKind::wavelet, std::move(m)};
}

TensorF layer_norm_rows(const TensorF& x, const TensorF* gain, const TensorF* bias,
                        double eps) {
  const std::size_t rows = x.rows(), d = x.cols();
  TensorF out = x;
  for (std::size_t t = 0; t < rows; ++t) {
    float* o = &out.data[t * d];
    double mu = 0.0;
    for (std::size_t j = 0; j < d; ++j) mu += o[j];
    mu /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (o[j] - mu) * (o[j] - mu);
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      double v = (o[j] - mu) * rstd;
      if (gain) v *= gain->data[j];
      if (bias) v += bias->data[j];
      o[j] = static_cast<float>(v);
    }
  }
  return out;
}

FeatureSequence fuse(const FeatureSequence& ssl, const FeatureSequence& wav,
                     const FusionNorm& norm) {
  const TensorF& a = ssl.matrix;
  const TensorF& b = wav.matrix;
  if (a.size() == 0 || b.size() == 0)
    throw InputError("fuse: empty feature sequence");
  const std::size_t t = std::min(a.rows(), b.rows());
  const std::size_t da = a.cols(), db = b.cols();
  const TensorF an = layer_norm_rows(a, norm.ssl_gain ? &*norm.ssl_gain : nullptr,
                                     norm.ssl_bias ? &*norm.ssl_bias : nullptr, norm.eps);
  const TensorF bn = layer_norm_rows(b, norm.wav_gain ? &*norm.wav_gain : nullptr,
                                     norm.wav_bias ? &*norm.wav_bias : nullptr, norm.eps);
  TensorF out = TensorF::zeros({t, da + db});
  for (std::size_t r = 0; r < t; ++r) {
    for (std::size_t j = 0; j < da; ++j) out(r, j) = an(r, j);
    for (std::size_t j = 0; j < db; ++j) out(r, da + j) = bn(r, j);
  }
  return {FeatureKind::fused, std::move(out)};
}

} // namespace bdhpd
