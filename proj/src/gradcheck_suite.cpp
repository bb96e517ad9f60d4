#include "bdhpd/gradcheck_suite.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "bdhpd/gradcheck.hpp"
#include "bdhpd/losses.hpp"
#include "bdhpd/model.hpp"
#include "bdhpd/rng.hpp"

namespace bdhpd {

namespace {

TensorD random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 1.0) {
  TensorD t = TensorD::zeros(std::move(shape));
  for (double& v : t.data) v = scale * rng.normal();
  return t;
}

// keep piecewise-linear kinks away from the finite-difference stencil
void nudge_from_zero(TensorD& t, double min_abs = 0.02) {
  for (double& v : t.data)
    if (std::fabs(v) < min_abs) v = v < 0.0 ? -min_abs : min_abs;
}

// contract a tensor-valued output into a scalar with fixed weights
Var contract(Tape<double>& tape, Var out, const std::vector<double>& w) {
  Tensor<double> probe = TensorD::zeros(tape.value(out).shape);
  for (std::size_t i = 0; i < probe.size(); ++i) probe[i] = w[i % w.size()];
  Var p = tape.leaf(std::move(probe));
  return tape.sum_squares(tape.add(tape.mul(out, p), p));
}

double check_layer(std::size_t seeds, const std::function<double(std::size_t)>& one) {
  double worst = 0.0;
  for (std::size_t s = 0; s < seeds; ++s) worst = std::max(worst, one(s));
  return worst;
}

double full_model_check(std::size_t seed_index) {
  Rng rng(derive_seed(0xFDFull, seed_index));
  ModelConfig cfg;
  cfg.d_ssl = 6;
  cfg.d_wav = 5;
  cfg.hidden = 7;
  cfg.ratio = 4;
  cfg.kernel = 3;
  cfg.embed_dim = 4;
  cfg.n_bottleneck = 1;
  Ablation ab;
  ContrastiveConfig closs;

  const ParamStore<float> params_f = init_params(cfg, 2, ab, derive_seed(77, seed_index));
  ParamStore<double> params = params_f.cast<double>();
  // perturb so layer norm gains etc. are not exactly 1/0
  {
    Rng prng(derive_seed(0x5045ULL, seed_index));
    for (std::size_t p = 0; p < params.size(); ++p)
      for (double& v : params[p].value.data) v += 0.05 * prng.normal();
  }

  const std::size_t n_params = params.size();
  const std::size_t batch = 6;
  const std::vector<TaskType> tasks = {TaskType::DDK,  TaskType::ContinuousSpeech,
                                       TaskType::DDK,  TaskType::ContinuousSpeech,
                                       TaskType::DDK,  TaskType::ContinuousSpeech};
  const std::vector<int> labels = {1, 1, 0, 0, 1, 0};
  const std::vector<std::size_t> langs = {0, 1, 0, 1, 0, 1};

  std::vector<TensorD> inputs;
  inputs.reserve(n_params + 2 * batch);
  for (std::size_t p = 0; p < n_params; ++p) inputs.push_back(params[p].value);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t t = 4 + (b % 2);
    inputs.push_back(random_tensor({t, cfg.d_ssl}, rng));
    inputs.push_back(random_tensor({t, cfg.d_wav}, rng));
  }

  const auto program = [&params, &cfg, &ab, &closs, &tasks, &labels, &langs, n_params,
                        batch](Tape<double>& tape, const std::vector<Var>& leaves) {
    std::vector<Var> bound(leaves.begin(), leaves.begin() + static_cast<long>(n_params));
    ModelGraph<double> graph(tape, params, std::move(bound), cfg, ab);
    std::vector<Var> probs, embeddings;
    for (std::size_t b = 0; b < batch; ++b) {
      const ForwardResult<double> out = graph.forward_bound(
          leaves[n_params + 2 * b], leaves[n_params + 2 * b + 1], langs[b], tasks[b]);
      probs.push_back(out.prob);
      embeddings.push_back(out.embedding);
    }
    return total_loss(tape, probs, embeddings, labels, tasks, ab, closs);
  };
  return grad_check(program, std::move(inputs)).max_rel_err;
}

} // namespace

std::vector<LayerGradReport> run_gradcheck_suite(std::size_t seeds) {
  std::vector<LayerGradReport> report;
  const auto add = [&](const std::string& name, double err) {
    report.push_back({name, err});
  };

  add("dense", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0xD0ULL, s));
        const std::size_t t = 2 + rng.below(4), din = 2 + rng.below(4), dout = 2 + rng.below(4);
        std::vector<double> probe{rng.normal(), rng.normal(), rng.normal()};
        return grad_check(
                   [&](Tape<double>& tape, const std::vector<Var>& v) {
                     return contract(tape, tape.dense(v[0], v[1], v[2]), probe);
                   },
                   {random_tensor({t, din}, rng), random_tensor({din, dout}, rng),
                    random_tensor({dout}, rng)})
            .max_rel_err;
      }));

  add("conv1d", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0xC1ULL, s));
        const std::size_t t = 3 + rng.below(5), cin = 1 + rng.below(3), cout = 1 + rng.below(3);
        const std::size_t k = 1 + 2 * rng.below(3);
        std::vector<double> probe{rng.normal(), rng.normal(), rng.normal()};
        return grad_check(
                   [&](Tape<double>& tape, const std::vector<Var>& v) {
                     return contract(tape, tape.conv1d_same(v[0], v[1], v[2]), probe);
                   },
                   {random_tensor({t, cin}, rng), random_tensor({k, cin, cout}, rng),
                    random_tensor({cout}, rng)})
            .max_rel_err;
      }));

  add("layer_norm", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0x14ULL, s));
        const std::size_t t = 2 + rng.below(4), d = 2 + rng.below(5);
        std::vector<double> probe{rng.normal(), rng.normal(), rng.normal()};
        return grad_check(
                   [&](Tape<double>& tape, const std::vector<Var>& v) {
                     return contract(tape, tape.layer_norm(v[0], v[1], v[2], 1e-8), probe);
                   },
                   {random_tensor({t, d}, rng), random_tensor({d}, rng, 0.5),
                    random_tensor({d}, rng, 0.5)})
            .max_rel_err;
      }));

  add("standardize_cols", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0x5cULL, s));
        const std::size_t t = 3 + rng.below(4), d = 2 + rng.below(5);
        std::vector<double> probe{rng.normal(), rng.normal(), rng.normal()};
        return grad_check(
                   [&](Tape<double>& tape, const std::vector<Var>& v) {
                     return contract(tape, tape.standardize_cols(v[0], 1e-8), probe);
                   },
                   {random_tensor({t, d}, rng)})
            .max_rel_err;
      }));

  add("col_affine", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0xAFULL, s));
        const std::size_t t = 2 + rng.below(4), d = 2 + rng.below(5);
        std::vector<double> probe{rng.normal(), rng.normal()};
        return grad_check(
                   [&](Tape<double>& tape, const std::vector<Var>& v) {
                     return contract(tape, tape.col_affine(v[0], v[1], v[2]), probe);
                   },
                   {random_tensor({t, d}, rng), random_tensor({d}, rng),
                    random_tensor({d}, rng)})
            .max_rel_err;
      }));

  add("relu", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0x12ULL, s));
        TensorD x = random_tensor({3 + rng.below(4), 2 + rng.below(4)}, rng);
        nudge_from_zero(x);
        std::vector<double> probe{rng.normal(), rng.normal()};
        return grad_check(
                   [&](Tape<double>& tape, const std::vector<Var>& v) {
                     return contract(tape, tape.relu(v[0]), probe);
                   },
                   {std::move(x)})
            .max_rel_err;
      }));

  add("sigmoid", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0x51ULL, s));
        std::vector<double> probe{rng.normal(), rng.normal()};
        return grad_check(
                   [&](Tape<double>& tape, const std::vector<Var>& v) {
                     return contract(tape, tape.sigmoid(v[0]), probe);
                   },
                   {random_tensor({2 + rng.below(4), 2 + rng.below(4)}, rng, 2.0)})
            .max_rel_err;
      }));

  add("softmax", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0x50ULL, s));
        std::vector<double> probe{rng.normal(), rng.normal()};
        return grad_check(
                   [&](Tape<double>& tape, const std::vector<Var>& v) {
                     return contract(tape, tape.softmax(v[0]), probe);
                   },
                   {random_tensor({2 + rng.below(4), 2 + rng.below(5)}, rng, 2.0)})
            .max_rel_err;
      }));

  add("attention_pool", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0xA9ULL, s));
        const std::size_t t = 2 + rng.below(5), d = 2 + rng.below(5);
        std::vector<double> probe{rng.normal(), rng.normal(), rng.normal()};
        return grad_check(
                   [&](Tape<double>& tape, const std::vector<Var>& v) {
                     Var w = tape.softmax(tape.matvec(v[0], v[1]));
                     return contract(tape, tape.vecmat(w, v[0]), probe);
                   },
                   {random_tensor({t, d}, rng), random_tensor({d}, rng)})
            .max_rel_err;
      }));

  add("embedding", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0xE6ULL, s));
        const std::size_t n = 2 + rng.below(3), e = 2 + rng.below(4);
        const std::size_t row = rng.below(n);
        std::vector<double> probe{rng.normal(), rng.normal()};
        return grad_check(
                   [&, row](Tape<double>& tape, const std::vector<Var>& v) {
                     return contract(tape, tape.embed_row(v[0], row), probe);
                   },
                   {random_tensor({n, e}, rng)})
            .max_rel_err;
      }));

  add("bce", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0xBCULL, s));
        const double y = rng.below(2) ? 1.0 : 0.0;
        TensorD p({1}, {0.1 + 0.8 * rng.uniform()});
        return grad_check(
                   [y](Tape<double>& tape, const std::vector<Var>& v) {
                     return tape.bce(v[0], y);
                   },
                   {std::move(p)})
            .max_rel_err;
      }));

  add("contrastive", check_layer(seeds, [](std::size_t s) {
        Rng rng(derive_seed(0xC0ULL, s));
        const std::size_t d = 2 + rng.below(4);
        ContrastiveConfig cc;
        return grad_check(
                   [&cc](Tape<double>& tape, const std::vector<Var>& v) {
                     const std::vector<Var> emb{v[0], v[1], v[2], v[3]};
                     const std::vector<int> labels{1, 1, 0, 0};
                     return *contrastive_loss(tape, emb, labels, cc);
                   },
                   {random_tensor({d}, rng), random_tensor({d}, rng),
                    random_tensor({d}, rng), random_tensor({d}, rng)})
            .max_rel_err;
      }));

  add("full_model", check_layer(seeds, full_model_check));
  return report;
}

} // namespace bdhpd
