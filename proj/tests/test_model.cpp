#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "bdhpd/features.hpp"
#include "bdhpd/losses.hpp"
#include "bdhpd/model.hpp"
#include "support/oracles.hpp"

using namespace bdhpd;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.d_ssl = 6;
  cfg.d_wav = 4;
  cfg.hidden = 8;
  cfg.ratio = 2;
  cfg.kernel = 3;
  cfg.embed_dim = 4;
  return cfg;
}

TensorF random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  TensorF t = TensorF::zeros({r, c});
  for (float& v : t.data) v = float(rng.normal());
  return t;
}

SampleInput<float> random_sample(const ModelConfig& cfg, std::size_t t, TaskType task,
                                 std::size_t lang, Rng& rng) {
  SampleInput<float> s;
  s.ssl = random_matrix(t, cfg.d_ssl, rng);
  s.wav = random_matrix(t, cfg.d_wav, rng);
  s.task = task;
  s.lang = lang;
  return s;
}

} // namespace

TEST_CASE("adaptive layer: standardization and modulation") {
  SUBCASE("gamma=1, beta=0 leaves per-channel time-mean at zero") {
    Rng rng(5);
    Tape<float> tape;
    Var x = tape.leaf(random_matrix(7, 3, rng));
    Var z = tape.standardize_cols(x, 1e-8f);
    const TensorF out = tape.value(z);
    for (std::size_t j = 0; j < 3; ++j) {
      double mean = 0.0;
      for (std::size_t t = 0; t < 7; ++t) mean += out(t, j);
      CHECK(std::fabs(mean / 7.0) < 1e-5);
    }
  }

  SUBCASE("constant channel becomes beta") {
    Tape<float> tape;
    TensorF x = TensorF::zeros({4, 2});
    for (std::size_t t = 0; t < 4; ++t) {
      x(t, 0) = 2.5f;            // constant channel
      x(t, 1) = float(t);        // varying channel
    }
    Var z = tape.standardize_cols(tape.leaf(x), 1e-8f);
    Var out = tape.col_affine(z, tape.leaf(TensorF::full({2}, 3.0f)),
                              tape.leaf(TensorF::vector({-1.5f, 0.0f})));
    for (std::size_t t = 0; t < 4; ++t)
      CHECK(tape.value(out)(t, 0) == doctest::Approx(-1.5f));
  }

  SUBCASE("hand-computed two-frame column with gamma=2, beta=1") {
    Tape<float> tape;
    Var z = tape.standardize_cols(tape.leaf(TensorF::matrix(2, 1, {1.0f, 3.0f})), 1e-12f);
    Var out = tape.col_affine(z, tape.leaf(TensorF::vector({2.0f})),
                              tape.leaf(TensorF::vector({1.0f})));
    CHECK(tape.value(out)(0, 0) == doctest::Approx(-1.0f).epsilon(1e-4));
    CHECK(tape.value(out)(1, 0) == doctest::Approx(3.0f).epsilon(1e-4));
  }
}

TEST_CASE("bottleneck gating") {
  Rng rng(9);
  const std::size_t t = 6, d = 4, c = 2, k = 3;
  const TensorF z = random_matrix(t, d, rng);
  TensorF w1 = TensorF::zeros({k, d, c});
  for (float& v : w1.data) v = float(rng.normal());
  const TensorF b1 = TensorF::zeros({c});
  auto run = [&](const TensorF& w2, const TensorF& b2) {
    Tape<float> tape;
    Var zv = tape.leaf(z);
    Var cv = tape.relu(tape.conv1d_same(zv, tape.leaf(w1), tape.leaf(b1)));
    Var ev = tape.conv1d_same(cv, tape.leaf(w2), tape.leaf(b2));
    Var out = tape.add(tape.mul(tape.sigmoid(ev), zv), zv);
    return tape.value(out);
  };

  SUBCASE("zero expansion gives exactly 1.5x") {
    const TensorF out = run(TensorF::zeros({k, c, d}), TensorF::zeros({d}));
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(out.data[i] == 1.5f * z.data[i]);
  }

  SUBCASE("a closed gate leaves the residual") {
    const TensorF out = run(TensorF::zeros({k, c, d}), TensorF::full({d}, -1e9f));
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(out.data[i] == z.data[i]);
  }

  SUBCASE("random instance matches the primitive-by-primitive oracle") {
    TensorF w2 = TensorF::zeros({k, c, d});
    for (float& v : w2.data) v = float(rng.normal());
    TensorF b2 = TensorF::zeros({d});
    for (float& v : b2.data) v = float(rng.normal());
    const TensorF got = run(w2, b2);

    const TensorD cd = oracles::naive_conv1d_same(z.cast<double>(), w1.cast<double>(),
                                                  b1.cast<double>());
    TensorD relu_c = cd;
    for (double& v : relu_c.data) v = std::max(0.0, v);
    const TensorD ed =
        oracles::naive_conv1d_same(relu_c, w2.cast<double>(), b2.cast<double>());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double gate = 1.0 / (1.0 + std::exp(-ed.data[i]));
      const double want = gate * z.data[i] + z.data[i];
      CHECK(double(got.data[i]) == doctest::Approx(want).epsilon(1e-4));
    }
  }

  SUBCASE("gate bounds the output between z and 2z") {
    TensorF w2 = TensorF::zeros({k, c, d});
    for (float& v : w2.data) v = float(rng.normal());
    const TensorF out = run(w2, TensorF::zeros({d}));
    for (std::size_t i = 0; i < z.size(); ++i) {
      const float lo = std::min(z.data[i], 2.0f * z.data[i]);
      const float hi = std::max(z.data[i], 2.0f * z.data[i]);
      CHECK(out.data[i] >= lo);
      CHECK(out.data[i] <= hi);
    }
  }
}

TEST_CASE("attention pooling") {
  SUBCASE("single frame pools to itself with weight one") {
    Tape<float> tape;
    Var m = tape.leaf(TensorF::matrix(1, 3, {4, 5, 6}));
    Var q = tape.leaf(TensorF::vector({0.3f, -2.0f, 1.0f}));
    Var w = tape.softmax(tape.matvec(m, q));
    Var pooled = tape.vecmat(w, m);
    CHECK(tape.value(w).data[0] == doctest::Approx(1.0f));
    CHECK(tape.value(pooled).data == std::vector<float>{4, 5, 6});
  }

  SUBCASE("zero query means uniform weights and the frame mean") {
    Rng rng(3);
    Tape<float> tape;
    const TensorF frames = random_matrix(5, 2, rng);
    Var m = tape.leaf(frames);
    Var w = tape.softmax(tape.matvec(m, tape.leaf(TensorF::zeros({2}))));
    Var pooled = tape.vecmat(w, m);
    for (float v : tape.value(w).data) CHECK(v == doctest::Approx(0.2f));
    for (std::size_t j = 0; j < 2; ++j) {
      double mean = 0.0;
      for (std::size_t t = 0; t < 5; ++t) mean += frames(t, j);
      CHECK(tape.value(pooled).data[j] == doctest::Approx(mean / 5.0).epsilon(1e-6));
    }
  }

  SUBCASE("hand-computed softmax(2,0) weighting") {
    Tape<float> tape;
    Var m = tape.leaf(TensorF::matrix(2, 2, {2, 0, 0, 0}));
    Var q = tape.leaf(TensorF::vector({1.0f, 0.0f}));
    Var w = tape.softmax(tape.matvec(m, q));
    Var pooled = tape.vecmat(w, m);
    CHECK(tape.value(w).data[0] == doctest::Approx(0.8808).epsilon(1e-3));
    CHECK(tape.value(w).data[1] == doctest::Approx(0.1192).epsilon(1e-3));
    CHECK(tape.value(pooled).data[0] == doctest::Approx(1.7616).epsilon(1e-3));
    CHECK(tape.value(pooled).data[1] == doctest::Approx(0.0));
  }

  SUBCASE("pooled vector stays in the per-dimension frame envelope") {
    Rng rng(13);
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t t = 2 + rng.below(6), d = 2 + rng.below(4);
      const TensorF frames = random_matrix(t, d, rng);
      TensorF q = TensorF::zeros({d});
      for (float& v : q.data) v = float(rng.normal());
      Tape<float> tape;
      Var m = tape.leaf(frames);
      Var w = tape.softmax(tape.matvec(m, tape.leaf(q)));
      Var pooled = tape.vecmat(w, m);
      double sum = 0.0;
      for (float v : tape.value(w).data) {
        CHECK(v >= 0.0f);
        sum += v;
      }
      CHECK(std::fabs(sum - 1.0) < 1e-6);
      for (std::size_t j = 0; j < d; ++j) {
        float lo = frames(0, j), hi = frames(0, j);
        for (std::size_t r = 1; r < t; ++r) {
          lo = std::min(lo, frames(r, j));
          hi = std::max(hi, frames(r, j));
        }
        CHECK(tape.value(pooled).data[j] >= lo - 1e-6f);
        CHECK(tape.value(pooled).data[j] <= hi + 1e-6f);
      }
    }
  }

  SUBCASE("frame permutation leaves the pooled output unchanged") {
    Rng rng(17);
    const std::size_t t = 6, d = 3;
    const TensorF frames = random_matrix(t, d, rng);
    TensorF q = TensorF::zeros({d});
    for (float& v : q.data) v = float(rng.normal());
    std::vector<std::size_t> perm{3, 0, 5, 1, 4, 2};
    TensorF shuffled = TensorF::zeros({t, d});
    for (std::size_t r = 0; r < t; ++r)
      for (std::size_t j = 0; j < d; ++j) shuffled(r, j) = frames(perm[r], j);
    auto pool = [&](const TensorF& m) {
      Tape<float> tape;
      Var mv = tape.leaf(m);
      Var w = tape.softmax(tape.matvec(mv, tape.leaf(q)));
      return tape.value(tape.vecmat(w, mv)).data;
    };
    const auto a = pool(frames), b = pool(shuffled);
    for (std::size_t j = 0; j < d; ++j) CHECK(a[j] == doctest::Approx(b[j]).epsilon(1e-6));
  }
}

TEST_CASE("head forward") {
  SUBCASE("all-zero head outputs probability one half") {
    Tape<float> tape;
    Var pooled = tape.leaf(TensorF::vector({1.0f, -2.0f, 0.5f}));
    Var h = tape.relu(tape.dense(pooled, tape.leaf(TensorF::zeros({3, 4})),
                                 tape.leaf(TensorF::zeros({4}))));
    Var logit = tape.dense(h, tape.leaf(TensorF::zeros({4, 1})), tape.leaf(TensorF::zeros({1})));
    CHECK(tape.value(tape.sigmoid(logit)).data[0] == 0.5f);
  }

  SUBCASE("large positive output bias saturates toward one") {
    Tape<float> tape;
    Var pooled = tape.leaf(TensorF::vector({0.1f}));
    Var h = tape.relu(tape.dense(pooled, tape.leaf(TensorF::zeros({1, 2})),
                                 tape.leaf(TensorF::zeros({2}))));
    Var logit =
        tape.dense(h, tape.leaf(TensorF::zeros({2, 1})), tape.leaf(TensorF::full({1}, 30.0f)));
    CHECK(tape.value(tape.sigmoid(logit)).data[0] > 0.999999f);
  }

  SUBCASE("random head equals the dense/relu/sigmoid oracle") {
    Rng rng(19);
    const std::size_t d = 5, h = 3;
    TensorF pooled = TensorF::zeros({d});
    for (float& v : pooled.data) v = float(rng.normal());
    TensorF w1 = random_matrix(d, h, rng), w2 = random_matrix(h, 1, rng);
    TensorF b1 = TensorF::zeros({h}), b2 = TensorF::zeros({1});
    for (float& v : b1.data) v = float(rng.normal());
    b2.data[0] = float(rng.normal());

    Tape<float> tape;
    Var hv = tape.relu(tape.dense(tape.leaf(pooled), tape.leaf(w1), tape.leaf(b1)));
    Var prob = tape.sigmoid(tape.dense(hv, tape.leaf(w2), tape.leaf(b2)));

    TensorD p2 = TensorD::zeros({1, d});
    for (std::size_t j = 0; j < d; ++j) p2(0, j) = pooled.data[j];
    TensorD h2 = oracles::naive_matmul(p2, w1.cast<double>(), b1.cast<double>());
    for (double& v : h2.data) v = std::max(0.0, v);
    const TensorD l2 = oracles::naive_matmul(h2, w2.cast<double>(), b2.cast<double>());
    const double want = 1.0 / (1.0 + std::exp(-l2.data[0]));
    CHECK(double(tape.value(prob).data[0]) == doctest::Approx(want).epsilon(1e-5));
  }
}

TEST_CASE("full forward: routing isolation, zero heads, reduced graph") {
  const ModelConfig cfg = tiny_config();
  Ablation ab;
  Rng rng(23);

  SUBCASE("DDK-only batch leaves the speech head untouched") {
    ParamStore<float> params = init_params(cfg, 2, ab, 11);
    Tape<float> tape;
    ModelGraph<float> graph(tape, params, cfg, ab);
    std::vector<Var> probs, embeds;
    std::vector<int> labels{1, 0, 1};
    std::vector<TaskType> tasks(3, TaskType::DDK);
    for (int i = 0; i < 3; ++i) {
      auto out = graph.forward(random_sample(cfg, 5, TaskType::DDK, i % 2, rng));
      probs.push_back(out.prob);
      embeds.push_back(out.embedding);
    }
    ContrastiveConfig cc;
    Var loss = total_loss(tape, probs, embeds, labels, tasks, ab, cc);
    tape.backward(loss);
    const std::vector<Var>& pv = graph.param_vars();
    for (std::size_t p = 0; p < params.size(); ++p) {
      const bool speech = params[p].name.rfind("head.speech", 0) == 0;
      const bool ddk = params[p].name.rfind("head.ddk", 0) == 0;
      double norm = 0.0;
      for (float g : tape.grad(pv[p]).data) norm += double(g) * double(g);
      if (speech) CHECK(norm == 0.0);
      if (ddk) CHECK(norm > 0.0);
    }
  }

  SUBCASE("zero-initialized heads output exactly one half") {
    ParamStore<float> params = init_params(cfg, 2, ab, 11);
    for (std::size_t p = 0; p < params.size(); ++p)
      if (params[p].name.rfind("head.", 0) == 0)
        std::fill(params[p].value.data.begin(), params[p].value.data.end(), 0.0f);
    Tape<float> tape;
    ModelGraph<float> graph(tape, params, cfg, ab);
    auto out = graph.forward(random_sample(cfg, 6, TaskType::ContinuousSpeech, 1, rng));
    CHECK(tape.value(out.prob).data[0] == 0.5f);
  }

  SUBCASE("no adaptive layers + closed gate reduces to pool-and-head on fused input") {
    ModelConfig reduced = cfg;
    reduced.placements.clear(); // n_adaptive = 0
    ParamStore<float> params = init_params(reduced, 2, ab, 31);
    params.at("bottleneck0.b2").value = TensorF::full({cfg.d_ssl + cfg.d_wav}, -1e9f);
    const SampleInput<float> s = random_sample(reduced, 7, TaskType::DDK, 0, rng);

    Tape<float> tape;
    ModelGraph<float> graph(tape, params, reduced, ab);
    auto out = graph.forward(s);

    // oracle path: eager fuse (init gains/biases are exactly 1/0), then
    // attention + head with the same parameters
    FeatureSequence ssl{FeatureKind::ssl, s.ssl}, wav{FeatureKind::wavelet, *s.wav};
    const TensorF fused = fuse(ssl, wav).matrix;
    Tape<float> tape2;
    Var m = tape2.leaf(fused);
    Var w = tape2.softmax(tape2.matvec(m, tape2.leaf(params.at("head.ddk.query").value)));
    Var pooled = tape2.vecmat(w, m);
    Var h = tape2.relu(tape2.dense(pooled, tape2.leaf(params.at("head.ddk.fc1.weight").value),
                                   tape2.leaf(params.at("head.ddk.fc1.bias").value)));
    Var prob = tape2.sigmoid(tape2.dense(h, tape2.leaf(params.at("head.ddk.fc2.weight").value),
                                         tape2.leaf(params.at("head.ddk.fc2.bias").value)));
    CHECK(tape.value(out.prob).data[0] ==
          doctest::Approx(tape2.value(prob).data[0]).epsilon(1e-6));
    for (std::size_t j = 0; j < cfg.d_ssl + cfg.d_wav; ++j)
      CHECK(tape.value(out.embedding).data[j] ==
            doctest::Approx(tape2.value(pooled).data[j]).epsilon(1e-5));
  }

  SUBCASE("unknown language index is a lookup error") {
    ParamStore<float> params = init_params(cfg, 2, ab, 11);
    Tape<float> tape;
    ModelGraph<float> graph(tape, params, cfg, ab);
    CHECK_THROWS_AS(graph.forward(random_sample(cfg, 4, TaskType::DDK, 5, rng)), LookupError);
  }

  SUBCASE("dual-head ablation shares one head across tasks") {
    Ablation single;
    single.dual_head = true;
    ParamStore<float> params = init_params(cfg, 2, single, 11);
    CHECK(params.contains("head.shared.query"));
    CHECK(!params.contains("head.ddk.query"));
    CHECK(head_prefix(TaskType::DDK, single) == "head.shared");
    CHECK(head_prefix(TaskType::ContinuousSpeech, single) == "head.shared");
  }

  SUBCASE("wavelet ablation shrinks the input dimension to d_ssl") {
    Ablation no_wav;
    no_wav.wavelet = true;
    CHECK(cfg.feature_dim(no_wav) == cfg.d_ssl);
    ParamStore<float> params = init_params(cfg, 2, no_wav, 11);
    CHECK(!params.contains("fusion.wav.gain"));
    CHECK(params.at("head.ddk.query").value.shape[0] == cfg.d_ssl);
    Tape<float> tape;
    ModelGraph<float> graph(tape, params, cfg, no_wav);
    SampleInput<float> s = random_sample(cfg, 5, TaskType::DDK, 0, rng);
    s.wav.reset();
    CHECK(tape.value(graph.forward(s).embedding).shape[0] == cfg.d_ssl);
  }
}

TEST_CASE("model config validation") {
  ModelConfig cfg = tiny_config();
  cfg.kernel = 4;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = tiny_config();
  cfg.ratio = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(placements_from_string("after_pooling"), ConfigError);
  CHECK(placements_from_string("after_fusion,after_bottleneck").size() == 2);
  CHECK_THROWS_AS(Ablation::from_components({"head_dual"}), UsageError);
}

TEST_CASE("language registry") {
  auto reg = LanguageRegistry::from_names({"synthB", "synthA", "synthB"});
  CHECK(reg.size() == 2);
  CHECK(reg.index_of("synthA") == 0);
  CHECK(reg.index_of("synthB") == 1);
  CHECK_THROWS_AS(reg.index_of("pcgita"), LookupError);
}
