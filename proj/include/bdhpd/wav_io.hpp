#ifndef BDHPD_WAV_IO_HPP
#define BDHPD_WAV_IO_HPP

#include <filesystem>

#include "bdhpd/framing.hpp"

namespace bdhpd {

// RIFF/WAVE, PCM, 16-bit, mono. Samples are scaled to [-1, 1] by 1/32768.
Waveform read_audio(const std::filesystem::path& path);

// Writes 16-bit PCM mono; input samples are clamped to [-1, 1].
void write_audio(const std::filesystem::path& path, const Waveform& w);

} // namespace bdhpd

#endif
