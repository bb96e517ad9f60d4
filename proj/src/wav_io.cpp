#include "bdhpd/wav_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "bdhpd/errors.hpp"

namespace bdhpd {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int s = 0; s < 32; s += 8) out.push_back(static_cast<char>((v >> s) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return p[0] | (std::uint32_t(p[1]) << 8) | (std::uint32_t(p[2]) << 16) |
         (std::uint32_t(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (std::uint16_t(p[1]) << 8));
}

} // namespace

Waveform read_audio(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("WAV: cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (bytes.size() < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    throw FormatError("WAV: " + path.string() + " is not a RIFF/WAVE file");

  // Chunk scan: fmt must precede data; unknown chunks are skipped.
  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t off = 12;
  Waveform w;
  bool have_data = false;
  while (off + 8 <= bytes.size()) {
    const std::uint32_t chunk_size = get_u32(p + off + 4);
    const bool is_fmt = std::memcmp(p + off, "fmt ", 4) == 0;
    const bool is_data = std::memcmp(p + off, "data", 4) == 0;
    const std::size_t body = off + 8;
    if (body + chunk_size > bytes.size())
      throw FormatError("WAV: " + path.string() + " truncated chunk");
    if (is_fmt) {
      if (chunk_size < 16) throw FormatError("WAV: " + path.string() + " fmt chunk too small");
      format = get_u16(p + body);
      channels = get_u16(p + body + 2);
      rate = get_u32(p + body + 4);
      bits = get_u16(p + body + 14);
      have_fmt = true;
    } else if (is_data) {
      if (!have_fmt) throw FormatError("WAV: " + path.string() + " data chunk before fmt");
      if (format != 1)
        throw FormatError("WAV: " + path.string() + " audio_format must be PCM(1), got " +
                          std::to_string(format));
      if (channels != 1)
        throw FormatError("WAV: " + path.string() + " channels must be 1, got " +
                          std::to_string(channels));
      if (bits != 16)
        throw FormatError("WAV: " + path.string() + " bits_per_sample must be 16, got " +
                          std::to_string(bits));
      const std::size_t n = chunk_size / 2;
      w.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        const std::int16_t s = static_cast<std::int16_t>(get_u16(p + body + 2 * i));
        w.samples[i] = static_cast<double>(s) / 32768.0;
      }
      w.sample_rate = static_cast<int>(rate);
      have_data = true;
      break;
    }
    off = body + chunk_size + (chunk_size % 2); // chunks are word-aligned
  }
  if (!have_data) throw FormatError("WAV: " + path.string() + " has no data chunk");
  if (w.sample_rate <= 0) throw FormatError("WAV: " + path.string() + " sample_rate is zero");
  return w;
}

void write_audio(const std::filesystem::path& path, const Waveform& w) {
  if (w.sample_rate <= 0) throw InputError("WAV: sample_rate must be positive");
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF", 4);
  put_u32(out, 36 + data_bytes);
  out.append("WAVE", 4);
  out.append("fmt ", 4);
  put_u32(out, 16);
  put_u16(out, 1); // PCM
  put_u16(out, 1); // mono
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 2);
  put_u16(out, 2);  // block align
  put_u16(out, 16); // bits
  out.append("data", 4);
  put_u32(out, data_bytes);
  for (double x : w.samples) {
    const long v = std::lround(x * 32768.0);
    const std::int16_t s = static_cast<std::int16_t>(std::clamp(v, -32768L, 32767L));
    put_u16(out, static_cast<std::uint16_t>(s));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("WAV: cannot write " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw FormatError("WAV: short write to " + path.string());
}

} // namespace bdhpd
