#include "bdhpd/ftrx.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "bdhpd/errors.hpp"

namespace bdhpd {

namespace {

// Serialization is explicitly little-endian regardless of host order.
void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

} // namespace

TensorF read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("FTRX: cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12)
    throw FormatError("FTRX: " + path.string() + " truncated header (" +
                      std::to_string(bytes.size()) + " bytes)");
  if (std::memcmp(bytes.data(), "FTRX", 4) != 0)
    throw FormatError("FTRX: " + path.string() + " has bad magic");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t rows = get_u32(p + 4);
  const std::uint32_t cols = get_u32(p + 8);
  if (rows == 0 || cols == 0)
    throw FormatError("FTRX: " + path.string() + " has zero dimension (rows=" +
                      std::to_string(rows) + ", cols=" + std::to_string(cols) + ")");
  const std::size_t expected = 12 + std::size_t(4) * rows * cols;
  if (bytes.size() != expected)
    throw FormatError("FTRX: " + path.string() + " payload size " +
                      std::to_string(bytes.size()) + " != expected " + std::to_string(expected));
  TensorF m = TensorF::zeros({rows, cols});
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::uint32_t u = get_u32(p + 12 + 4 * i);
    float f;
    std::memcpy(&f, &u, 4);
    m.data[i] = f;
  }
  return m;
}

void write_matrix(const std::filesystem::path& path, const TensorF& m) {
  if (m.rank() != 2)
    throw DimensionError("FTRX: matrix must be rank 2, got " + m.shape_str());
  if (m.shape[0] == 0 || m.shape[1] == 0)
    throw FormatError("FTRX: refusing to write zero dimension " + m.shape_str());
  std::string out;
  out.reserve(12 + 4 * m.size());
  out.append("FTRX", 4);
  put_u32(out, static_cast<std::uint32_t>(m.shape[0]));
  put_u32(out, static_cast<std::uint32_t>(m.shape[1]));
  for (float f : m.data) {
    std::uint32_t u;
    std::memcpy(&u, &f, 4);
    put_u32(out, u);
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw FormatError("FTRX: cannot write " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw FormatError("FTRX: short write to " + path.string());
}

} // namespace bdhpd
