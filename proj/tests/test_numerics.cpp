#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdhpd/gradcheck.hpp"
#include "bdhpd/gradcheck_suite.hpp"
#include "bdhpd/tape.hpp"
#include "support/oracles.hpp"

using namespace bdhpd;

namespace {

TensorD random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  TensorD t = TensorD::zeros({r, c});
  for (double& v : t.data) v = rng.normal();
  return t;
}

} // namespace

TEST_CASE("dense identity and hand arithmetic") {
  Tape<double> tape;
  Var x = tape.leaf(TensorD::identity(2));
  Var w = tape.leaf(TensorD::identity(2));
  Var b = tape.leaf(TensorD::zeros({2}));
  Var out = tape.dense(x, w, b);
  CHECK(tape.value(out).data == TensorD::identity(2).data);

  Var x2 = tape.leaf(TensorD::matrix(1, 2, {1, 2}));
  Var w2 = tape.leaf(TensorD::matrix(2, 1, {1, 1}));
  Var b2 = tape.leaf(TensorD::vector({0.5}));
  CHECK(tape.value(tape.dense(x2, w2, b2)).data[0] == doctest::Approx(3.5));
}

TEST_CASE("dense matches the brute-force oracle on random shapes") {
  Rng rng(101);
  const TensorD x = random_matrix(3, 4, rng);
  const TensorD w = random_matrix(4, 2, rng);
  TensorD b = TensorD::zeros({2});
  for (double& v : b.data) v = rng.normal();
  Tape<double> tape;
  const TensorD got = tape.value(tape.dense(tape.leaf(x), tape.leaf(w), tape.leaf(b)));
  const TensorD want = oracles::naive_matmul(x, w, b);
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
}

TEST_CASE("dense rejects mismatched shapes, naming both") {
  Tape<double> tape;
  Var x = tape.leaf(TensorD::zeros({2, 3}));
  Var w = tape.leaf(TensorD::zeros({4, 2}));
  Var b = tape.leaf(TensorD::zeros({2}));
  try {
    tape.dense(x, w, b);
    FAIL("expected DimensionError");
  } catch (const DimensionError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("[2x3]") != std::string::npos);
    CHECK(msg.find("[4x2]") != std::string::npos);
  }
}

TEST_CASE("conv1d identity, zero filters, and the sliding-window oracle") {
  Rng rng(7);
  const TensorD x = random_matrix(7, 2, rng);

  SUBCASE("k=1 identity channel map") {
    TensorD w = TensorD::zeros({1, 2, 2});
    w.data[0] = 1.0;
    w.data[3] = 1.0; // identity over channels
    Tape<double> tape;
    const TensorD got =
        tape.value(tape.conv1d_same(tape.leaf(x), tape.leaf(w), tape.leaf(TensorD::zeros({2}))));
    CHECK(got.data == x.data);
  }

  SUBCASE("zero filters give zero output") {
    Tape<double> tape;
    const TensorD got = tape.value(tape.conv1d_same(tape.leaf(x), tape.leaf(TensorD::zeros({3, 2, 3})),
                                                    tape.leaf(TensorD::zeros({3}))));
    for (double v : got.data) CHECK(v == 0.0);
  }

  SUBCASE("random instance equals the oracle") {
    TensorD w = TensorD::zeros({3, 2, 3});
    for (double& v : w.data) v = rng.normal();
    TensorD b = TensorD::zeros({3});
    for (double& v : b.data) v = rng.normal();
    Tape<double> tape;
    const TensorD got = tape.value(tape.conv1d_same(tape.leaf(x), tape.leaf(w), tape.leaf(b)));
    const TensorD want = oracles::naive_conv1d_same(x, w, b);
    for (std::size_t i = 0; i < want.size(); ++i)
      CHECK(got.data[i] == doctest::Approx(want.data[i]).epsilon(1e-12));
  }

  SUBCASE("even kernels are a configuration error") {
    Tape<double> tape;
    CHECK_THROWS_AS(tape.conv1d_same(tape.leaf(x), tape.leaf(TensorD::zeros({2, 2, 2})),
                                     tape.leaf(TensorD::zeros({2}))),
                    ConfigError);
  }
}

TEST_CASE("layer_norm edge cases") {
  Tape<double> tape;
  SUBCASE("constant vector maps to zeros") {
    Var x = tape.leaf(TensorD::matrix(1, 4, {3, 3, 3, 3}));
    Var g = tape.leaf(TensorD::full({4}, 1.0));
    Var b = tape.leaf(TensorD::zeros({4}));
    for (double v : tape.value(tape.layer_norm(x, g, b, 1e-8)).data)
      CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("two-point standardization") {
    Var x = tape.leaf(TensorD::matrix(1, 2, {1, 3}));
    Var g = tape.leaf(TensorD::full({2}, 1.0));
    Var b = tape.leaf(TensorD::zeros({2}));
    const TensorD out = tape.value(tape.layer_norm(x, g, b, 1e-12));
    CHECK(out.data[0] == doctest::Approx(-1.0).epsilon(1e-5));
    CHECK(out.data[1] == doctest::Approx(1.0).epsilon(1e-5));
  }
  SUBCASE("zero gain gives the bias back") {
    Var x = tape.leaf(TensorD::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
    Var g = tape.leaf(TensorD::zeros({3}));
    Var b = tape.leaf(TensorD::full({3}, 0.25));
    for (double v : tape.value(tape.layer_norm(x, g, b, 1e-8)).data) CHECK(v == 0.25);
  }
}

TEST_CASE("layer_norm statistics invariant") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t t = 1 + rng.below(4), d = 8 + rng.below(16);
    TensorD x = random_matrix(t, d, rng);
    for (double& v : x.data) v = 2.0 + 3.0 * v; // variance well above eps
    Tape<double> tape;
    const TensorD out = tape.value(tape.layer_norm(tape.leaf(x), tape.leaf(TensorD::full({d}, 1.0)),
                                                   tape.leaf(TensorD::zeros({d})), 1e-8));
    for (std::size_t r = 0; r < t; ++r) {
      double mean = 0.0, var = 0.0;
      for (std::size_t j = 0; j < d; ++j) mean += out(r, j);
      mean /= double(d);
      for (std::size_t j = 0; j < d; ++j) var += (out(r, j) - mean) * (out(r, j) - mean);
      var /= double(d);
      CHECK(std::fabs(mean) < 1e-6);
      CHECK(std::fabs(std::sqrt(var) - 1.0) < 1e-4);
    }
  }
}

TEST_CASE("activation examples") {
  Tape<double> tape;
  CHECK(tape.value(tape.sigmoid(tape.leaf(TensorD::vector({0.0})))).data[0] == 0.5);
  const TensorD sm = tape.value(tape.softmax(tape.leaf(TensorD::vector({2.5, 2.5, 2.5, 2.5}))));
  for (double v : sm.data) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(tape.value(tape.relu(tape.leaf(TensorD::vector({-3.0})))).data[0] == 0.0);
}

TEST_CASE("softmax rows are a probability simplex") {
  Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t t = 1 + rng.below(5), d = 2 + rng.below(6);
    TensorD x = random_matrix(t, d, rng);
    for (double& v : x.data) v *= 30.0; // exercise the max-subtraction path
    Tape<double> tape;
    const TensorD out = tape.value(tape.softmax(tape.leaf(x)));
    for (std::size_t r = 0; r < t; ++r) {
      double sum = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        CHECK(out(r, j) >= 0.0);
        sum += out(r, j);
      }
      CHECK(std::fabs(sum - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("grad_check: exact quadratic") {
  Rng rng(31);
  TensorD x = random_matrix(3, 3, rng);
  const auto rep = grad_check(
      [](Tape<double>& tape, const std::vector<Var>& v) { return tape.sum_squares(v[0]); },
      {std::move(x)});
  CHECK(rep.max_rel_err < 1e-7);
}

TEST_CASE("grad_check: unused parameters keep exactly zero gradients") {
  Tape<double> tape;
  Var used = tape.leaf(TensorD::vector({1.0, 2.0}));
  Var unused = tape.leaf(TensorD::vector({5.0, 6.0}));
  Var loss = tape.sum_squares(used);
  tape.backward(loss);
  for (double g : tape.grad(unused).data) CHECK(g == 0.0);
  CHECK(tape.grad(used).data[0] == doctest::Approx(2.0));
}

TEST_CASE("gradcheck suite: every primitive under 1e-4 (5 random instances)") {
  for (const auto& r : run_gradcheck_suite(5)) {
    INFO(r.layer);
    CHECK(r.max_rel_err < 1e-4);
  }
}

TEST_CASE("non-finite program value raises NumericError") {
  CHECK_THROWS_AS(grad_check(
                      [](Tape<double>& tape, const std::vector<Var>& v) {
                        return tape.sqrt_scalar(v[0]); // sqrt(-1) -> NaN
                      },
                      {TensorD({1}, {-1.0})}),
                  NumericError);
}
