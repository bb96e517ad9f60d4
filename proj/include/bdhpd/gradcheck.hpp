#ifndef BDHPD_GRADCHECK_HPP
#define BDHPD_GRADCHECK_HPP

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "bdhpd/tape.hpp"

namespace bdhpd {

// A differentiable scalar program: given a fresh tape and leaves created from
// the supplied input tensors, build the graph and return the scalar root.
// Must be pure (same inputs, same value).
using ScalarProgram =
    std::function<Var(Tape<double>&, const std::vector<Var>&)>;

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::size_t worst_input = 0;
  std::size_t worst_coord = 0;
};

namespace detail {

inline double eval_program(const ScalarProgram& fn,
                           const std::vector<Tensor<double>>& inputs) {
  Tape<double> tape;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const auto& t : inputs) leaves.push_back(tape.leaf(t));
  const Var root = fn(tape, leaves);
  const double v = tape.value(root).data[0];
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite program value");
  return v;
}

} // namespace detail

// Compare analytic gradients of fn at `inputs` against central finite
// differences, coordinate by coordinate, and report the worst relative error
// rel = |a - n| / max(|a|, |n|, 1). Run at 64-bit precision only; the
// finite-difference tolerance is unreachable at 32-bit.
inline GradCheckReport grad_check(const ScalarProgram& fn,
                                  std::vector<Tensor<double>> inputs,
                                  double eps = 1e-6) {
  Tape<double> tape;
  std::vector<Var> leaves;
  leaves.reserve(inputs.size());
  for (const auto& t : inputs) leaves.push_back(tape.leaf(t));
  const Var root = fn(tape, leaves);
  if (!tape.value(root).all_finite())
    throw NumericError("grad_check: non-finite program value");
  tape.backward(root);

  GradCheckReport rep;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const Tensor<double>& analytic = tape.grad(leaves[k]);
    for (std::size_t c = 0; c < inputs[k].size(); ++c) {
      const double x0 = inputs[k].data[c];
      const double h = eps * std::max(1.0, std::abs(x0));
      inputs[k].data[c] = x0 + h;
      const double fp = detail::eval_program(fn, inputs);
      inputs[k].data[c] = x0 - h;
      const double fm = detail::eval_program(fn, inputs);
      inputs[k].data[c] = x0;
      const double numeric = (fp - fm) / (2.0 * h);
      const double a = analytic.data[c];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1.0});
      if (rel > rep.max_rel_err) {
        rep.max_rel_err = rel;
        rep.worst_input = k;
        rep.worst_coord = c;
      }
    }
  }
  return rep;
}

} // namespace bdhpd

#endif
