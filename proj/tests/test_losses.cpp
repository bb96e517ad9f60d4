#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bdhpd/losses.hpp"
#include "support/oracles.hpp"

using namespace bdhpd;

namespace {

std::vector<Tensor<double>> embed_1d(std::initializer_list<double> xs) {
  std::vector<Tensor<double>> out;
  for (double x : xs) out.push_back(TensorD::vector({x}));
  return out;
}

double contrastive_value(const std::vector<Tensor<double>>& emb, const std::vector<int>& labels,
                         const ContrastiveConfig& cfg) {
  Tape<double> tape;
  std::vector<Var> vars;
  for (const auto& e : emb) vars.push_back(tape.leaf(e));
  auto term = contrastive_loss(tape, vars, labels, cfg);
  return term ? tape.value(*term).data[0] : 0.0;
}

} // namespace

TEST_CASE("bce examples") {
  Tape<double> tape;
  CHECK(tape.value(tape.bce(tape.leaf(TensorD({1}, {0.5})), 1.0)).data[0] ==
        doctest::Approx(0.6931).epsilon(1e-3));
  CHECK(tape.value(tape.bce(tape.leaf(TensorD({1}, {0.5})), 0.0)).data[0] ==
        doctest::Approx(0.6931).epsilon(1e-3));
  CHECK(tape.value(tape.bce(tape.leaf(TensorD({1}, {1.0 - 1e-9})), 1.0)).data[0] ==
        doctest::Approx(0.0).epsilon(1e-6));
  CHECK(tape.value(tape.bce(tape.leaf(TensorD({1}, {0.9})), 1.0)).data[0] ==
        doctest::Approx(0.10536).epsilon(1e-4));
  // clamping keeps extreme probabilities finite
  CHECK(std::isfinite(tape.value(tape.bce(tape.leaf(TensorD({1}, {0.0})), 1.0)).data[0]));
}

TEST_CASE("mine_hard_pairs: spec example and degenerate batches") {
  SUBCASE("four-point batch") {
    const auto emb = embed_1d({0.0, 1.0, 0.9, 3.0});
    const std::vector<int> labels{0, 0, 1, 1};
    const PairIndices got = mine_hard_pairs(emb, labels);
    REQUIRE(got.hardest_positive);
    REQUIRE(got.hardest_negative);
    CHECK(got.hardest_positive->first == 2);
    CHECK(got.hardest_positive->second == 3);
    CHECK(got.hardest_negative->first == 1);
    CHECK(got.hardest_negative->second == 2);
  }
  SUBCASE("all labels equal: negative term absent") {
    const auto got = mine_hard_pairs(embed_1d({0.0, 1.0, 2.0}), {1, 1, 1});
    CHECK(got.hardest_positive);
    CHECK(!got.hardest_negative);
  }
  SUBCASE("two samples, distinct labels: positive term absent") {
    const auto got = mine_hard_pairs(embed_1d({0.0, 1.0}), {0, 1});
    CHECK(!got.hardest_positive);
    REQUIRE(got.hardest_negative);
    CHECK(got.hardest_negative->first == 0);
    CHECK(got.hardest_negative->second == 1);
  }
}

TEST_CASE("mine_hard_pairs agrees with exhaustive search, ties included") {
  Rng rng(515);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(63);
    const std::size_t d = 1 + rng.below(4);
    std::vector<Tensor<double>> emb;
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      TensorD e = TensorD::zeros({d});
      // quantized coordinates force frequent distance ties
      for (double& v : e.data) v = double(rng.below(4)) * 0.5;
      emb.push_back(std::move(e));
      labels.push_back(int(rng.below(2)));
    }
    const PairIndices got = mine_hard_pairs(emb, labels);
    const auto want = oracles::exhaustive_hard_pairs(emb, labels);
    CHECK(got.hardest_positive == want.pos);
    CHECK(got.hardest_negative == want.neg);
  }
}

TEST_CASE("contrastive loss values") {
  ContrastiveConfig cfg; // margins 0.2 / 1.0, hinged

  SUBCASE("hand-computed margins") {
    // labels {0,0,1}: d_pos = 0.5, d_neg = 0.7
    CHECK(contrastive_value(embed_1d({0.0, 0.5, 1.2}), {0, 0, 1}, cfg) ==
          doctest::Approx(0.6).epsilon(1e-6));
  }
  SUBCASE("hinged loss is zero exactly when both margins are satisfied") {
    CHECK(contrastive_value(embed_1d({0.0, 0.1, 2.0}), {0, 0, 1}, cfg) == 0.0);
    CHECK(contrastive_value(embed_1d({0.0, 0.3, 2.0}), {0, 0, 1}, cfg) > 0.0);
    CHECK(contrastive_value(embed_1d({0.0, 0.1, 0.9}), {0, 0, 1}, cfg) > 0.0);
  }
  SUBCASE("literal unclamped form can go negative") {
    ContrastiveConfig literal = cfg;
    literal.hinge = false;
    CHECK(contrastive_value(embed_1d({0.0, 0.1, 2.0}), {0, 0, 1}, literal) ==
          doctest::Approx((0.1 - 0.2) + (1.0 - 1.9)).epsilon(1e-6));
  }
  SUBCASE("four-point batch equals mining plus formula") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<Tensor<double>> emb;
      for (int i = 0; i < 4; ++i) {
        TensorD e = TensorD::zeros({3});
        for (double& v : e.data) v = rng.normal();
        emb.push_back(std::move(e));
      }
      const std::vector<int> labels{0, 1, 0, 1};
      const auto pairs = oracles::exhaustive_hard_pairs(emb, labels);
      const double d_pos = euclidean_distance(emb[pairs.pos->first], emb[pairs.pos->second]);
      const double d_neg = euclidean_distance(emb[pairs.neg->first], emb[pairs.neg->second]);
      const double want = std::max(0.0, d_pos - cfg.m_pos) + std::max(0.0, cfg.m_neg - d_neg);
      CHECK(contrastive_value(emb, labels, cfg) == doctest::Approx(want).epsilon(1e-9));
    }
  }
  SUBCASE("rigid translation leaves the loss unchanged") {
    Rng rng(99);
    std::vector<Tensor<double>> emb;
    for (int i = 0; i < 6; ++i) {
      TensorD e = TensorD::zeros({4});
      for (double& v : e.data) v = rng.normal();
      emb.push_back(std::move(e));
    }
    const std::vector<int> labels{0, 1, 0, 1, 1, 0};
    const double base = contrastive_value(emb, labels, cfg);
    for (auto& e : emb)
      for (std::size_t j = 0; j < 4; ++j) e.data[j] += 17.5 - double(j);
    CHECK(contrastive_value(emb, labels, cfg) == doctest::Approx(base).epsilon(1e-9));
  }
  SUBCASE("margin validation") {
    ContrastiveConfig bad;
    bad.m_pos = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
  }
}

TEST_CASE("total_loss composition") {
  Ablation ab;
  ContrastiveConfig cfg;

  auto build_batch = [](Tape<double>& tape, const std::vector<double>& ps,
                        const std::vector<std::vector<double>>& embs) {
    std::pair<std::vector<Var>, std::vector<Var>> out;
    for (double p : ps) out.first.push_back(tape.leaf(TensorD({1}, {p})));
    for (const auto& e : embs) out.second.push_back(tape.leaf(TensorD::vector(std::vector<double>(e))));
    return out;
  };

  SUBCASE("lambda zero reduces to mean BCE") {
    ContrastiveConfig off = cfg;
    off.lambda = 0.0;
    Tape<double> tape;
    auto [probs, embs] = build_batch(tape, {0.9, 0.2}, {{0.0}, {1.0}});
    const std::vector<int> labels{1, 0};
    const std::vector<TaskType> tasks{TaskType::DDK, TaskType::DDK};
    const double got = tape.value(total_loss(tape, probs, embs, labels, tasks, ab, off)).data[0];
    const double want = 0.5 * (-std::log(0.9) - std::log(0.8));
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }

  SUBCASE("perfect predictions and well-separated embeddings give zero") {
    Tape<double> tape;
    auto [probs, embs] = build_batch(tape, {1.0 - 1e-9, 1e-9, 1.0 - 1e-9, 1e-9},
                                     {{0.0}, {5.0}, {0.05}, {5.05}});
    const std::vector<int> labels{1, 0, 1, 0};
    const std::vector<TaskType> tasks(4, TaskType::ContinuousSpeech);
    CHECK(tape.value(total_loss(tape, probs, embs, labels, tasks, ab, cfg)).data[0] ==
          doctest::Approx(0.0).epsilon(1e-6));
  }

  SUBCASE("mixed batch equals the hand-composed sub-losses") {
    Tape<double> tape;
    auto [probs, embs] = build_batch(
        tape, {0.7, 0.4, 0.6, 0.3},
        {{0.0, 0.0}, {0.3, 0.4}, {0.2, 0.1}, {0.6, 0.4}});
    const std::vector<int> labels{1, 0, 1, 0};
    const std::vector<TaskType> tasks{TaskType::DDK, TaskType::DDK,
                                      TaskType::ContinuousSpeech, TaskType::ContinuousSpeech};
    const double got = tape.value(total_loss(tape, probs, embs, labels, tasks, ab, cfg)).data[0];

    const double bce = 0.25 * (-std::log(0.7) - std::log(0.6) - std::log(0.6) - std::log(0.7));
    // each head sees one positive-less batch of two: only the negative term
    const double ddk_term = std::max(0.0, cfg.m_neg - std::hypot(0.3, 0.4));
    const double speech_term = std::max(0.0, cfg.m_neg - std::hypot(0.4, 0.3));
    CHECK(got == doctest::Approx(bce + ddk_term + speech_term).epsilon(1e-9));
  }

  SUBCASE("contrastive ablation drops the extra terms") {
    Ablation no_c;
    no_c.contrastive = true;
    Tape<double> tape;
    auto [probs, embs] = build_batch(tape, {0.9, 0.2}, {{0.0}, {0.01}});
    const std::vector<int> labels{1, 0};
    const std::vector<TaskType> tasks{TaskType::DDK, TaskType::DDK};
    const double got = tape.value(total_loss(tape, probs, embs, labels, tasks, no_c, cfg)).data[0];
    const double want = 0.5 * (-std::log(0.9) - std::log(0.8));
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}
