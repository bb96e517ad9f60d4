#include "bdhpd/framing.hpp"

#include <cmath>
#include <string>

namespace bdhpd {

std::size_t FrameConfig::window_samples(int rate) const {
  return static_cast<std::size_t>(std::llround(window_ms * rate / 1000.0));
}

std::size_t FrameConfig::hop_samples(int rate) const {
  return static_cast<std::size_t>(std::llround(hop_ms * rate / 1000.0));
}

void FrameConfig::validate() const {
  if (!(hop_ms > 0.0) || !(hop_ms <= window_ms))
    throw ConfigError("frame: need 0 < hop_ms <= window_ms, got hop=" +
                      std::to_string(hop_ms) + " window=" + std::to_string(window_ms));
}

std::size_t frame_count(std::size_t num_samples, int rate, const FrameConfig& cfg) {
  cfg.validate();
  const std::size_t w = cfg.window_samples(rate);
  const std::size_t h = cfg.hop_samples(rate);
  if (num_samples < w) return 0;
  return (num_samples - w) / h + 1;
}

std::vector<std::vector<double>> frame_signal(const Waveform& w,
                                              const FrameConfig& cfg) {
  cfg.validate();
  if (w.sample_rate <= 0) throw InputError("frame_signal: sample_rate must be positive");
  const std::size_t win = cfg.window_samples(w.sample_rate);
  const std::size_t hop = cfg.hop_samples(w.sample_rate);
  if (w.samples.size() < win)
    throw InputError("frame_signal: waveform of " + std::to_string(w.samples.size()) +
                     " samples is shorter than one window (" + std::to_string(win) + ")");
  const std::size_t n = (w.samples.size() - win) / hop + 1;
  std::vector<std::vector<double>> frames;
  frames.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t start = i * hop;
    frames.emplace_back(w.samples.begin() + start, w.samples.begin() + start + win);
  }
  return frames;
}

} // namespace bdhpd
