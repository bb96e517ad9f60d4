#ifndef BDHPD_TENSOR_HPP
#define BDHPD_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "bdhpd/errors.hpp"

namespace bdhpd {

// Dense row-major tensor. Value semantics; immutable by convention once it
// enters a compute record. Rank 1 and 2 are the only ranks the model graph
// uses, but conv filters are stored rank-3.
template <typename T>
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<T> data;

  Tensor() = default;

  Tensor(std::vector<std::size_t> s, std::vector<T> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (count(shape) != data.size())
      throw DimensionError("tensor: data length " + std::to_string(data.size()) +
                           " does not match shape " + shape_str(shape));
  }

  static std::size_t count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
  }

  static Tensor zeros(std::vector<std::size_t> s) {
    std::size_t n = count(s);
    return Tensor(std::move(s), std::vector<T>(n, T(0)));
  }

  static Tensor full(std::vector<std::size_t> s, T v) {
    std::size_t n = count(s);
    return Tensor(std::move(s), std::vector<T>(n, v));
  }

  static Tensor vector(std::vector<T> d) {
    std::vector<std::size_t> s{d.size()};
    return Tensor(std::move(s), std::move(d));
  }

  static Tensor matrix(std::size_t r, std::size_t c, std::vector<T> d) {
    return Tensor({r, c}, std::move(d));
  }

  static Tensor identity(std::size_t n) {
    Tensor t = zeros({n, n});
    for (std::size_t i = 0; i < n; ++i) t.data[i * n + i] = T(1);
    return t;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }

  std::size_t rows() const { return rank() == 1 ? 1 : shape[0]; }
  std::size_t cols() const { return rank() == 1 ? shape[0] : shape[rank() - 1]; }

  T& operator[](std::size_t i) { return data[i]; }
  const T& operator[](std::size_t i) const { return data[i]; }

  T& operator()(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  const T& operator()(std::size_t r, std::size_t c) const {
    return data[r * cols() + c];
  }

  bool all_finite() const {
    for (const T& v : data)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  static std::string shape_str(const std::vector<std::size_t>& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
  }

  std::string shape_str() const { return shape_str(shape); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.reserve(data.size());
    for (const T& v : data) out.data.push_back(static_cast<U>(v));
    return out;
  }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

} // namespace bdhpd

#endif
