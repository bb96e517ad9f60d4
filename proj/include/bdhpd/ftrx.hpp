#ifndef BDHPD_FTRX_HPP
#define BDHPD_FTRX_HPP

#include <filesystem>

#include "bdhpd/tensor.hpp"

namespace bdhpd {

// FTRX: magic "FTRX", uint32 LE rows, uint32 LE cols, then rows*cols
// float32 LE values, row-major. File size is 12 + 4*rows*cols bytes.
TensorF read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const TensorF& m);

} // namespace bdhpd

#endif
