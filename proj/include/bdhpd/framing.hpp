#ifndef BDHPD_FRAMING_HPP
#define BDHPD_FRAMING_HPP

#include <cstddef>
#include <vector>

#include "bdhpd/errors.hpp"

namespace bdhpd {

struct Waveform {
  std::vector<double> samples; // in [-1, 1]
  int sample_rate = 16000;
};

// 25 ms / 20 ms defaults give 50 feature vectors per second at 16 kHz,
// matching the frame rate of the SSL matrices they are fused with.
struct FrameConfig {
  double window_ms = 25.0;
  double hop_ms = 20.0;

  std::size_t window_samples(int rate) const;
  std::size_t hop_samples(int rate) const;
  void validate() const;
};

// Overlapping frames at the configured stride; a trailing partial window is
// dropped. Throws InputError when the waveform is shorter than one window.
std::vector<std::vector<double>> frame_signal(const Waveform& w,
                                              const FrameConfig& cfg);

// Number of frames frame_signal would produce, without materializing them.
std::size_t frame_count(std::size_t num_samples, int rate, const FrameConfig& cfg);

} // namespace bdhpd

#endif
