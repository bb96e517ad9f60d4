#ifndef BDHPD_WAVELET_HPP
#define BDHPD_WAVELET_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "bdhpd/errors.hpp"

namespace bdhpd {

enum class WaveletFamily { haar, db4 };

WaveletFamily wavelet_family_from_string(const std::string& s);
std::string to_string(WaveletFamily f);

struct WaveletConfig {
  WaveletFamily family = WaveletFamily::db4;
  std::size_t levels = 5;
  double eps = 1e-8; // inside log-energy
};

// Orthonormal analysis filter pair; dec_hi is the quadrature mirror of
// dec_lo: g[m] = (-1)^m h[L-1-m].
struct WaveletFilters {
  std::vector<double> dec_lo;
  std::vector<double> dec_hi;
};

const WaveletFilters& wavelet_filters(WaveletFamily f);

// Multilevel pyramid. details[0] is the finest band (first analysis step),
// details[levels-1] the coarsest.
struct DwtPyramid {
  std::vector<std::vector<double>> details;
  std::vector<double> approx;
  std::size_t original_len = 0;
  std::size_t padded_len = 0; // equals original_len; retained for tooling

  // Band order used everywhere downstream: approx, then details from
  // coarsest to finest.
  std::vector<const std::vector<double>*> bands() const;
};

// One analysis step with periodic boundary extension; n must be even.
// The high-pass is applied to the locally centered window so constant
// inputs produce exactly zero detail coefficients.
void dwt_step(const std::vector<double>& x, const WaveletFilters& f,
              std::vector<double>& approx, std::vector<double>& detail);

// Orthonormal periodized analysis. The frame length must be a multiple of
// 2^levels so every level sees an even length; under that condition energy
// conservation and perfect reconstruction are exact.
DwtPyramid dwt(const std::vector<double>& frame, const WaveletConfig& cfg);

// Per-band statistics [log(energy+eps), mean(|c|), std(c)] over the
// levels+1 bands of the pyramid; output dimension is 3*(levels+1). Frames
// whose length is not a multiple of 2^levels are first extended
// periodically to the next multiple (a 25 ms frame at 16 kHz gains 16
// wrapped samples at 5 levels).
std::vector<double> wavelet_features(const std::vector<double>& frame,
                                     const WaveletConfig& cfg);

inline std::size_t wavelet_feature_dim(const WaveletConfig& cfg) {
  return 3 * (cfg.levels + 1);
}

} // namespace bdhpd

#endif
