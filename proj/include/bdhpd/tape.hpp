#ifndef BDHPD_TAPE_HPP
#define BDHPD_TAPE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bdhpd/errors.hpp"
#include "bdhpd/tensor.hpp"

namespace bdhpd {

// Handle to a node on a Tape.
struct Var {
  std::uint32_t i = 0;
};

// Reverse-mode compute record. Every operation appends one node holding its
// output value, a zero-initialized gradient buffer, and a closure that
// scatters the node's gradient to its parents. backward() replays the record
// once in reverse creation order, so gradients of nodes that never fed the
// requested scalar stay exactly zero.
//
// Precision is a template parameter: float for training, double for
// finite-difference gradient validation.
template <typename T>
class Tape {
public:
  Var leaf(Tensor<T> v) { return push(std::move(v), nullptr); }

  const Tensor<T>& value(Var v) const { return nodes_[v.i].value; }
  const Tensor<T>& grad(Var v) const { return nodes_[v.i].grad; }
  std::size_t size() const { return nodes_.size(); }

  // out[t,j] = sum_i x[t,i] * W[i,j] + b[j]; x may be rank 1 (a single row).
  Var dense(Var xv, Var wv, Var bv) {
    const Tensor<T>& x = value(xv);
    const Tensor<T>& w = value(wv);
    const Tensor<T>& b = value(bv);
    if (w.rank() != 2)
      throw DimensionError("dense: weight must be rank 2, got " + w.shape_str());
    const std::size_t rows = x.rows(), din = x.cols();
    const std::size_t dout = w.shape[1];
    if (din != w.shape[0] || b.size() != dout)
      throw DimensionError("dense: input " + x.shape_str() + " incompatible with weight " +
                           w.shape_str() + " / bias " + b.shape_str());
    Tensor<T> out = x.rank() == 1 ? Tensor<T>::zeros({dout}) : Tensor<T>::zeros({rows, dout});
    for (std::size_t t = 0; t < rows; ++t) {
      T* o = &out.data[t * dout];
      for (std::size_t j = 0; j < dout; ++j) o[j] = b.data[j];
      const T* xr = &x.data[t * din];
      for (std::size_t i = 0; i < din; ++i) {
        const T xi = xr[i];
        const T* wr = &w.data[i * dout];
        for (std::size_t j = 0; j < dout; ++j) o[j] += xi * wr[j];
      }
    }
    return push(std::move(out), [this, xv, wv, bv, rows, din, dout](const Node& n) {
      auto& gx = nodes_[xv.i].grad;
      auto& gw = nodes_[wv.i].grad;
      auto& gb = nodes_[bv.i].grad;
      const auto& x = nodes_[xv.i].value;
      const auto& w = nodes_[wv.i].value;
      for (std::size_t t = 0; t < rows; ++t) {
        const T* go = &n.grad.data[t * dout];
        T* gxr = &gx.data[t * din];
        const T* xr = &x.data[t * din];
        for (std::size_t i = 0; i < din; ++i) {
          const T* wr = &w.data[i * dout];
          T* gwr = &gw.data[i * dout];
          T acc = T(0);
          const T xi = xr[i];
          for (std::size_t j = 0; j < dout; ++j) {
            acc += go[j] * wr[j];
            gwr[j] += xi * go[j];
          }
          gxr[i] += acc;
        }
        for (std::size_t j = 0; j < dout; ++j) gb.data[j] += go[j];
      }
    });
  }

  // Temporal convolution, stride 1, zero padding (K-1)/2 per side so the
  // output keeps the input length. W is [K x Cin x Cout].
  Var conv1d_same(Var xv, Var wv, Var bv) {
    const Tensor<T>& x = value(xv);
    const Tensor<T>& w = value(wv);
    const Tensor<T>& b = value(bv);
    if (x.rank() != 2 || w.rank() != 3)
      throw DimensionError("conv1d: need x rank 2 and W rank 3, got " + x.shape_str() +
                           " and " + w.shape_str());
    const std::size_t tlen = x.shape[0], cin = x.shape[1];
    const std::size_t k = w.shape[0], cout = w.shape[2];
    if (k % 2 == 0)
      throw ConfigError("conv1d: kernel size must be odd, got " + std::to_string(k));
    if (w.shape[1] != cin || b.size() != cout)
      throw DimensionError("conv1d: input " + x.shape_str() + " incompatible with filter " +
                           w.shape_str() + " / bias " + b.shape_str());
    const std::ptrdiff_t pad = static_cast<std::ptrdiff_t>(k / 2);
    Tensor<T> out = Tensor<T>::zeros({tlen, cout});
    for (std::size_t t = 0; t < tlen; ++t) {
      T* o = &out.data[t * cout];
      for (std::size_t j = 0; j < cout; ++j) o[j] = b.data[j];
      for (std::size_t kk = 0; kk < k; ++kk) {
        const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(kk) - pad;
        if (s < 0 || s >= static_cast<std::ptrdiff_t>(tlen)) continue;
        const T* xr = &x.data[static_cast<std::size_t>(s) * cin];
        const T* wk = &w.data[kk * cin * cout];
        for (std::size_t i = 0; i < cin; ++i) {
          const T xi = xr[i];
          const T* wr = &wk[i * cout];
          for (std::size_t j = 0; j < cout; ++j) o[j] += xi * wr[j];
        }
      }
    }
    return push(std::move(out), [this, xv, wv, bv, tlen, cin, k, cout, pad](const Node& n) {
      auto& gx = nodes_[xv.i].grad;
      auto& gw = nodes_[wv.i].grad;
      auto& gb = nodes_[bv.i].grad;
      const auto& x = nodes_[xv.i].value;
      const auto& w = nodes_[wv.i].value;
      for (std::size_t t = 0; t < tlen; ++t) {
        const T* go = &n.grad.data[t * cout];
        for (std::size_t j = 0; j < cout; ++j) gb.data[j] += go[j];
        for (std::size_t kk = 0; kk < k; ++kk) {
          const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(kk) - pad;
          if (s < 0 || s >= static_cast<std::ptrdiff_t>(tlen)) continue;
          const T* xr = &x.data[static_cast<std::size_t>(s) * cin];
          T* gxr = &gx.data[static_cast<std::size_t>(s) * cin];
          const T* wk = &w.data[kk * cin * cout];
          T* gwk = &gw.data[kk * cin * cout];
          for (std::size_t i = 0; i < cin; ++i) {
            const T* wr = &wk[i * cout];
            T* gwr = &gwk[i * cout];
            const T xi = xr[i];
            T acc = T(0);
            for (std::size_t j = 0; j < cout; ++j) {
              acc += go[j] * wr[j];
              gwr[j] += xi * go[j];
            }
            gxr[i] += acc;
          }
        }
      }
    });
  }

  // Standardize each row over the last axis, then per-column gain/bias.
  Var layer_norm(Var xv, Var gv, Var bv, T eps) {
    const Tensor<T>& x = value(xv);
    const Tensor<T>& g = value(gv);
    const Tensor<T>& b = value(bv);
    const std::size_t rows = x.rows(), d = x.cols();
    if (g.size() != d || b.size() != d)
      throw DimensionError("layer_norm: gain " + g.shape_str() + " / bias " + b.shape_str() +
                           " do not match feature dim of " + x.shape_str());
    if (eps <= T(0)) throw ConfigError("layer_norm: eps must be positive");
    Tensor<T> out = x;
    std::vector<T> rstd(rows), mean(rows);
    for (std::size_t t = 0; t < rows; ++t) {
      T* o = &out.data[t * d];
      T mu = T(0);
      for (std::size_t j = 0; j < d; ++j) mu += o[j];
      mu /= static_cast<T>(d);
      T var = T(0);
      for (std::size_t j = 0; j < d; ++j) {
        const T c = o[j] - mu;
        var += c * c;
      }
      var /= static_cast<T>(d);
      const T rs = T(1) / std::sqrt(var + eps);
      mean[t] = mu;
      rstd[t] = rs;
      for (std::size_t j = 0; j < d; ++j)
        o[j] = (o[j] - mu) * rs * g.data[j] + b.data[j];
    }
    return push(std::move(out),
                [this, xv, gv, bv, rows, d, mean = std::move(mean), rstd = std::move(rstd)](const Node& n) {
      auto& gx = nodes_[xv.i].grad;
      auto& gg = nodes_[gv.i].grad;
      auto& gb = nodes_[bv.i].grad;
      const auto& x = nodes_[xv.i].value;
      const auto& g = nodes_[gv.i].value;
      for (std::size_t t = 0; t < rows; ++t) {
        const T* go = &n.grad.data[t * d];
        const T* xr = &x.data[t * d];
        T* gxr = &gx.data[t * d];
        // dyh = dy*gain; dx = rstd*(dyh - mean(dyh) - xhat*mean(dyh*xhat))
        T s1 = T(0), s2 = T(0);
        for (std::size_t j = 0; j < d; ++j) {
          const T xh = (xr[j] - mean[t]) * rstd[t];
          const T dyh = go[j] * g.data[j];
          s1 += dyh;
          s2 += dyh * xh;
          gg.data[j] += go[j] * xh;
          gb.data[j] += go[j];
        }
        s1 /= static_cast<T>(d);
        s2 /= static_cast<T>(d);
        for (std::size_t j = 0; j < d; ++j) {
          const T xh = (xr[j] - mean[t]) * rstd[t];
          const T dyh = go[j] * g.data[j];
          gxr[j] += rstd[t] * (dyh - s1 - xh * s2);
        }
      }
    });
  }

  // Standardize each column over the row (time) axis; population statistics.
  Var standardize_cols(Var xv, T eps) {
    const Tensor<T>& x = value(xv);
    if (x.rank() != 2)
      throw DimensionError("standardize_cols: need rank 2, got " + x.shape_str());
    const std::size_t tlen = x.shape[0], d = x.shape[1];
    std::vector<T> mean(d, T(0)), rstd(d, T(0));
    for (std::size_t t = 0; t < tlen; ++t)
      for (std::size_t j = 0; j < d; ++j) mean[j] += x.data[t * d + j];
    for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<T>(tlen);
    for (std::size_t t = 0; t < tlen; ++t)
      for (std::size_t j = 0; j < d; ++j) {
        const T c = x.data[t * d + j] - mean[j];
        rstd[j] += c * c;
      }
    for (std::size_t j = 0; j < d; ++j)
      rstd[j] = T(1) / std::sqrt(rstd[j] / static_cast<T>(tlen) + eps);
    Tensor<T> out = x;
    for (std::size_t t = 0; t < tlen; ++t)
      for (std::size_t j = 0; j < d; ++j)
        out.data[t * d + j] = (out.data[t * d + j] - mean[j]) * rstd[j];
    return push(std::move(out),
                [this, xv, tlen, d, mean = std::move(mean), rstd = std::move(rstd)](const Node& n) {
      auto& gx = nodes_[xv.i].grad;
      const auto& x = nodes_[xv.i].value;
      std::vector<T> s1(d, T(0)), s2(d, T(0));
      for (std::size_t t = 0; t < tlen; ++t)
        for (std::size_t j = 0; j < d; ++j) {
          const T xh = (x.data[t * d + j] - mean[j]) * rstd[j];
          s1[j] += n.grad.data[t * d + j];
          s2[j] += n.grad.data[t * d + j] * xh;
        }
      for (std::size_t j = 0; j < d; ++j) {
        s1[j] /= static_cast<T>(tlen);
        s2[j] /= static_cast<T>(tlen);
      }
      for (std::size_t t = 0; t < tlen; ++t)
        for (std::size_t j = 0; j < d; ++j) {
          const T xh = (x.data[t * d + j] - mean[j]) * rstd[j];
          gx.data[t * d + j] += rstd[j] * (n.grad.data[t * d + j] - s1[j] - xh * s2[j]);
        }
    });
  }

  // out[t,j] = gamma[j] * x[t,j] + beta[j]
  Var col_affine(Var xv, Var gammav, Var betav) {
    const Tensor<T>& x = value(xv);
    const Tensor<T>& gm = value(gammav);
    const Tensor<T>& bt = value(betav);
    const std::size_t rows = x.rows(), d = x.cols();
    if (gm.size() != d || bt.size() != d)
      throw DimensionError("col_affine: gamma " + gm.shape_str() + " / beta " + bt.shape_str() +
                           " do not match " + x.shape_str());
    Tensor<T> out = x;
    for (std::size_t t = 0; t < rows; ++t)
      for (std::size_t j = 0; j < d; ++j)
        out.data[t * d + j] = gm.data[j] * out.data[t * d + j] + bt.data[j];
    return push(std::move(out), [this, xv, gammav, betav, rows, d](const Node& n) {
      auto& gx = nodes_[xv.i].grad;
      auto& ggm = nodes_[gammav.i].grad;
      auto& gbt = nodes_[betav.i].grad;
      const auto& x = nodes_[xv.i].value;
      const auto& gm = nodes_[gammav.i].value;
      for (std::size_t t = 0; t < rows; ++t)
        for (std::size_t j = 0; j < d; ++j) {
          const T go = n.grad.data[t * d + j];
          gx.data[t * d + j] += go * gm.data[j];
          ggm.data[j] += go * x.data[t * d + j];
          gbt.data[j] += go;
        }
    });
  }

  Var relu(Var xv) {
    Tensor<T> out = value(xv);
    for (T& v : out.data) v = v > T(0) ? v : T(0);
    return push(std::move(out), [this, xv](const Node& n) {
      auto& gx = nodes_[xv.i].grad;
      const auto& x = nodes_[xv.i].value;
      for (std::size_t i = 0; i < gx.size(); ++i)
        if (x.data[i] > T(0)) gx.data[i] += n.grad.data[i];
    });
  }

  Var sigmoid(Var xv) {
    Tensor<T> out = value(xv);
    for (T& v : out.data) {
      // split on sign for overflow safety
      if (v >= T(0)) {
        v = T(1) / (T(1) + std::exp(-v));
      } else {
        const T e = std::exp(v);
        v = e / (T(1) + e);
      }
    }
    return push(std::move(out), [this, xv](const Node& n) {
      auto& gx = nodes_[xv.i].grad;
      for (std::size_t i = 0; i < gx.size(); ++i) {
        const T y = n.value.data[i];
        gx.data[i] += n.grad.data[i] * y * (T(1) - y);
      }
    });
  }

  // Row-wise softmax over the last axis with max-subtraction stabilization.
  Var softmax(Var xv) {
    const Tensor<T>& x = value(xv);
    const std::size_t rows = x.rows(), d = x.cols();
    Tensor<T> out = x;
    for (std::size_t t = 0; t < rows; ++t) {
      T* o = &out.data[t * d];
      T mx = o[0];
      for (std::size_t j = 1; j < d; ++j) mx = std::max(mx, o[j]);
      T sum = T(0);
      for (std::size_t j = 0; j < d; ++j) {
        o[j] = std::exp(o[j] - mx);
        sum += o[j];
      }
      for (std::size_t j = 0; j < d; ++j) o[j] /= sum;
    }
    return push(std::move(out), [this, xv, rows, d](const Node& n) {
      auto& gx = nodes_[xv.i].grad;
      for (std::size_t t = 0; t < rows; ++t) {
        const T* y = &n.value.data[t * d];
        const T* go = &n.grad.data[t * d];
        T dot = T(0);
        for (std::size_t j = 0; j < d; ++j) dot += go[j] * y[j];
        T* gxr = &gx.data[t * d];
        for (std::size_t j = 0; j < d; ++j) gxr[j] += y[j] * (go[j] - dot);
      }
    });
  }

  Var add(Var av, Var bv) {
    const Tensor<T>& a = value(av);
    const Tensor<T>& b = value(bv);
    if (!a.same_shape(b))
      throw DimensionError("add: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    Tensor<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += b.data[i];
    return push(std::move(out), [this, av, bv](const Node& n) {
      auto& ga = nodes_[av.i].grad;
      auto& gb = nodes_[bv.i].grad;
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        ga.data[i] += n.grad.data[i];
        gb.data[i] += n.grad.data[i];
      }
    });
  }

  Var sub(Var av, Var bv) {
    const Tensor<T>& a = value(av);
    const Tensor<T>& b = value(bv);
    if (!a.same_shape(b))
      throw DimensionError("sub: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    Tensor<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] -= b.data[i];
    return push(std::move(out), [this, av, bv](const Node& n) {
      auto& ga = nodes_[av.i].grad;
      auto& gb = nodes_[bv.i].grad;
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        ga.data[i] += n.grad.data[i];
        gb.data[i] -= n.grad.data[i];
      }
    });
  }

  Var mul(Var av, Var bv) {
    const Tensor<T>& a = value(av);
    const Tensor<T>& b = value(bv);
    if (!a.same_shape(b))
      throw DimensionError("mul: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    Tensor<T> out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= b.data[i];
    return push(std::move(out), [this, av, bv](const Node& n) {
      auto& ga = nodes_[av.i].grad;
      auto& gb = nodes_[bv.i].grad;
      const auto& a = nodes_[av.i].value;
      const auto& b = nodes_[bv.i].value;
      for (std::size_t i = 0; i < n.grad.size(); ++i) {
        ga.data[i] += n.grad.data[i] * b.data[i];
        gb.data[i] += n.grad.data[i] * a.data[i];
      }
    });
  }

  Var scale(Var av, T c) {
    Tensor<T> out = value(av);
    for (T& v : out.data) v *= c;
    return push(std::move(out), [this, av, c](const Node& n) {
      auto& ga = nodes_[av.i].grad;
      for (std::size_t i = 0; i < n.grad.size(); ++i) ga.data[i] += c * n.grad.data[i];
    });
  }

  Var add_const(Var av, T c) {
    Tensor<T> out = value(av);
    for (T& v : out.data) v += c;
    return push(std::move(out), [this, av](const Node& n) {
      auto& ga = nodes_[av.i].grad;
      for (std::size_t i = 0; i < n.grad.size(); ++i) ga.data[i] += n.grad.data[i];
    });
  }

  // Column-wise concatenation of two matrices with equal row counts.
  Var concat_cols(Var av, Var bv) {
    const Tensor<T>& a = value(av);
    const Tensor<T>& b = value(bv);
    if (a.rank() != 2 || b.rank() != 2 || a.shape[0] != b.shape[0])
      throw DimensionError("concat_cols: need equal row counts, got " + a.shape_str() +
                           " and " + b.shape_str());
    const std::size_t rows = a.shape[0], da = a.shape[1], db = b.shape[1];
    Tensor<T> out = Tensor<T>::zeros({rows, da + db});
    for (std::size_t t = 0; t < rows; ++t) {
      std::copy_n(&a.data[t * da], da, &out.data[t * (da + db)]);
      std::copy_n(&b.data[t * db], db, &out.data[t * (da + db) + da]);
    }
    return push(std::move(out), [this, av, bv, rows, da, db](const Node& n) {
      auto& ga = nodes_[av.i].grad;
      auto& gb = nodes_[bv.i].grad;
      for (std::size_t t = 0; t < rows; ++t) {
        const T* go = &n.grad.data[t * (da + db)];
        for (std::size_t j = 0; j < da; ++j) ga.data[t * da + j] += go[j];
        for (std::size_t j = 0; j < db; ++j) gb.data[t * db + j] += go[da + j];
      }
    });
  }

  // Select one row of a matrix; gradient accumulates into that row only.
  Var embed_row(Var tablev, std::size_t row) {
    const Tensor<T>& tb = value(tablev);
    if (tb.rank() != 2)
      throw DimensionError("embed_row: table must be rank 2, got " + tb.shape_str());
    if (row >= tb.shape[0])
      throw LookupError("embed_row: row " + std::to_string(row) + " out of range for table " +
                        tb.shape_str());
    const std::size_t d = tb.shape[1];
    Tensor<T> out = Tensor<T>::zeros({d});
    std::copy_n(&tb.data[row * d], d, out.data.begin());
    return push(std::move(out), [this, tablev, row, d](const Node& n) {
      auto& gt = nodes_[tablev.i].grad;
      for (std::size_t j = 0; j < d; ++j) gt.data[row * d + j] += n.grad.data[j];
    });
  }

  // scores[t] = <m[t,:], v>
  Var matvec(Var mv, Var vv) {
    const Tensor<T>& m = value(mv);
    const Tensor<T>& v = value(vv);
    if (m.rank() != 2 || v.size() != m.shape[1])
      throw DimensionError("matvec: " + m.shape_str() + " vs " + v.shape_str());
    const std::size_t tlen = m.shape[0], d = m.shape[1];
    Tensor<T> out = Tensor<T>::zeros({tlen});
    for (std::size_t t = 0; t < tlen; ++t) {
      T acc = T(0);
      const T* mr = &m.data[t * d];
      for (std::size_t j = 0; j < d; ++j) acc += mr[j] * v.data[j];
      out.data[t] = acc;
    }
    return push(std::move(out), [this, mv, vv, tlen, d](const Node& n) {
      auto& gm = nodes_[mv.i].grad;
      auto& gv = nodes_[vv.i].grad;
      const auto& m = nodes_[mv.i].value;
      const auto& v = nodes_[vv.i].value;
      for (std::size_t t = 0; t < tlen; ++t) {
        const T gs = n.grad.data[t];
        const T* mr = &m.data[t * d];
        T* gmr = &gm.data[t * d];
        for (std::size_t j = 0; j < d; ++j) {
          gmr[j] += gs * v.data[j];
          gv.data[j] += gs * mr[j];
        }
      }
    });
  }

  // pooled[j] = sum_t w[t] * m[t,j]
  Var vecmat(Var wv, Var mv) {
    const Tensor<T>& w = value(wv);
    const Tensor<T>& m = value(mv);
    if (m.rank() != 2 || w.size() != m.shape[0])
      throw DimensionError("vecmat: " + w.shape_str() + " vs " + m.shape_str());
    const std::size_t tlen = m.shape[0], d = m.shape[1];
    Tensor<T> out = Tensor<T>::zeros({d});
    for (std::size_t t = 0; t < tlen; ++t) {
      const T wt = w.data[t];
      const T* mr = &m.data[t * d];
      for (std::size_t j = 0; j < d; ++j) out.data[j] += wt * mr[j];
    }
    return push(std::move(out), [this, wv, mv, tlen, d](const Node& n) {
      auto& gw = nodes_[wv.i].grad;
      auto& gm = nodes_[mv.i].grad;
      const auto& w = nodes_[wv.i].value;
      const auto& m = nodes_[mv.i].value;
      for (std::size_t t = 0; t < tlen; ++t) {
        const T* mr = &m.data[t * d];
        T* gmr = &gm.data[t * d];
        T acc = T(0);
        const T wt = w.data[t];
        for (std::size_t j = 0; j < d; ++j) {
          acc += n.grad.data[j] * mr[j];
          gmr[j] += wt * n.grad.data[j];
        }
        gw.data[t] += acc;
      }
    });
  }

  // Scalar sum of squared entries.
  Var sum_squares(Var av) {
    const Tensor<T>& a = value(av);
    T acc = T(0);
    for (const T& v : a.data) acc += v * v;
    return push(Tensor<T>({1}, {acc}), [this, av](const Node& n) {
      auto& ga = nodes_[av.i].grad;
      const auto& a = nodes_[av.i].value;
      const T g = n.grad.data[0];
      for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += T(2) * a.data[i] * g;
    });
  }

  Var sqrt_scalar(Var av) {
    const Tensor<T>& a = value(av);
    if (a.size() != 1) throw DimensionError("sqrt_scalar: need scalar, got " + a.shape_str());
    const T y = std::sqrt(a.data[0]);
    return push(Tensor<T>({1}, {y}), [this, av, y](const Node& n) {
      // slope guard near zero keeps backward finite for coincident points
      const T denom = std::max(y, T(1e-6));
      nodes_[av.i].grad.data[0] += n.grad.data[0] / (T(2) * denom);
    });
  }

  // Binary cross-entropy of a scalar probability against a fixed label.
  // p is clamped to [1e-7, 1-1e-7]; outside the clamp the derivative is 0.
  Var bce(Var pv, T y) {
    const Tensor<T>& p = value(pv);
    if (p.size() != 1) throw DimensionError("bce: need scalar probability, got " + p.shape_str());
    const T lo = T(1e-7), hi = T(1) - T(1e-7);
    const T pc = std::min(hi, std::max(lo, p.data[0]));
    const T loss = -(y * std::log(pc) + (T(1) - y) * std::log(T(1) - pc));
    return push(Tensor<T>({1}, {loss}), [this, pv, y, lo, hi](const Node& n) {
      const T praw = nodes_[pv.i].value.data[0];
      if (praw < lo || praw > hi) return;
      const T g = -y / praw + (T(1) - y) / (T(1) - praw);
      nodes_[pv.i].grad.data[0] += n.grad.data[0] * g;
    });
  }

  // Scalar linear combination sum_i coeffs[i] * xs[i]; every xs must be scalar.
  Var linear_comb(std::span<const Var> xs, std::span<const T> coeffs) {
    if (xs.size() != coeffs.size() || xs.empty())
      throw UsageError("linear_comb: need matching, nonempty vars and coefficients");
    T acc = T(0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (value(xs[i]).size() != 1)
        throw DimensionError("linear_comb: operand " + std::to_string(i) + " is not scalar");
      acc += coeffs[i] * value(xs[i]).data[0];
    }
    std::vector<Var> xs_(xs.begin(), xs.end());
    std::vector<T> cs_(coeffs.begin(), coeffs.end());
    return push(Tensor<T>({1}, {acc}), [this, xs_ = std::move(xs_), cs_ = std::move(cs_)](const Node& n) {
      for (std::size_t i = 0; i < xs_.size(); ++i)
        nodes_[xs_[i].i].grad.data[0] += cs_[i] * n.grad.data[0];
    });
  }

  // Reverse sweep from a scalar root. Each node's backward closure runs at
  // most once; leaves keep their accumulated gradients afterwards.
  void backward(Var root) {
    if (value(root).size() != 1)
      throw UsageError("backward: root must be scalar, got " + value(root).shape_str());
    if (!value(root).all_finite())
      throw NumericError("backward: non-finite loss value");
    nodes_[root.i].grad.data[0] = T(1);
    for (std::size_t i = root.i + 1; i-- > 0;) {
      if (nodes_[i].back) nodes_[i].back(nodes_[i]);
    }
  }

private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    std::function<void(const Node&)> back;
  };

  Var push(Tensor<T> v, std::function<void(const Node&)> back) {
    Node n;
    n.grad = Tensor<T>::zeros(v.shape);
    n.value = std::move(v);
    n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  std::vector<Node> nodes_;
};

} // namespace bdhpd

#endif
