#ifndef BDHPD_MODEL_HPP
#define BDHPD_MODEL_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bdhpd/manifest.hpp"
#include "bdhpd/params.hpp"
#include "bdhpd/rng.hpp"
#include "bdhpd/tape.hpp"

namespace bdhpd {

// Dataset tag -> embedding row. Indices are assigned in sorted-name order so
// the registry is independent of manifest ordering.
class LanguageRegistry {
public:
  LanguageRegistry() = default;
  static LanguageRegistry from_names(std::vector<std::string> names);

  // Unknown datasets raise; silently reusing another language's statistics
  // would corrupt results invisibly. Use an explicit mapping instead.
  std::size_t index_of(const std::string& dataset) const;
  bool contains(const std::string& dataset) const;
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

private:
  std::vector<std::string> names_;
  std::map<std::string, std::size_t> index_;
};

enum class Placement { AfterFusion, AfterBottleneck };

std::vector<Placement> placements_from_string(const std::string& csv);
std::string to_string(const std::vector<Placement>& ps);

// Components that the ablation study can remove. All false = full model.
struct Ablation {
  bool dual_head = false;
  bool adaptive_layers = false;
  bool bottleneck = false;
  bool wavelet = false;
  bool contrastive = false;

  static Ablation from_components(const std::vector<std::string>& names);
  std::vector<std::string> components() const;
  static const std::vector<std::string>& all_component_names();
};

struct ModelConfig {
  std::size_t d_ssl = 64;
  std::size_t d_wav = 18;
  std::size_t hidden = 128;    // head hidden width
  std::size_t ratio = 4;       // bottleneck compression
  std::size_t kernel = 3;      // bottleneck conv kernel, odd
  std::size_t embed_dim = 16;  // language embedding width
  std::size_t n_bottleneck = 1;
  std::vector<Placement> placements = {Placement::AfterFusion,
                                       Placement::AfterBottleneck};
  double norm_eps = 1e-8;

  std::size_t n_adaptive() const { return placements.size(); }
  std::size_t feature_dim(const Ablation& ab) const {
    return d_ssl + (ab.wavelet ? 0 : d_wav);
  }
  // ceil(D/ratio); equals D/ratio whenever ratio divides D
  std::size_t compressed_dim(const Ablation& ab) const {
    return (feature_dim(ab) + ratio - 1) / ratio;
  }
  void validate() const;
};

// Fresh parameters for the configured graph. Only parameters of active
// components are created, so a checkpoint carries exactly what the graph
// uses. Initialization: uniform fan-in for dense/conv weights, 0.1 * normal
// for language embeddings, zero attention queries (uniform pooling at the
// start of training), gamma-map biases at 1 so adaptive layers start as
// identity modulation.
ParamStore<float> init_params(const ModelConfig& cfg, std::size_t n_lang,
                              const Ablation& ab, std::uint64_t seed);

// Head selection: every sample is processed by exactly one head.
std::string head_prefix(TaskType task, const Ablation& ab);

template <typename T>
struct SampleInput {
  Tensor<T> ssl;                    // [T x d_ssl]
  std::optional<Tensor<T>> wav;     // [T x d_wav]
  std::size_t lang = 0;
  TaskType task = TaskType::ContinuousSpeech;
};

template <typename T>
struct ForwardResult {
  Var prob;      // scalar in (0,1)
  Var embedding; // pooled [D], the head's post-attention vector
  Var weights;   // attention weights [T]
};

// Binds a ParamStore onto a tape (leaf per parameter, in store order) and
// builds per-sample forward graphs against those shared leaves.
template <typename T>
class ModelGraph {
public:
  ModelGraph(Tape<T>& tape, const ParamStore<T>& params, const ModelConfig& cfg,
             const Ablation& ab)
      : tape_(tape), params_(params), cfg_(cfg), ab_(ab) {
    vars_.reserve(params.size());
    for (std::size_t i = 0; i < params.size(); ++i)
      vars_.push_back(tape_.leaf(params[i].value));
  }

  // Build against pre-bound parameter leaves (one Var per store entry, in
  // store order); used by the finite-difference checks, which own the leaves.
  ModelGraph(Tape<T>& tape, const ParamStore<T>& params, std::vector<Var> bound,
             const ModelConfig& cfg, const Ablation& ab)
      : tape_(tape), params_(params), cfg_(cfg), ab_(ab), vars_(std::move(bound)) {
    if (vars_.size() != params.size())
      throw UsageError("ModelGraph: bound vars do not match the parameter store");
  }

  Var param(const std::string& name) const { return vars_[params_.index_of(name)]; }
  const std::vector<Var>& param_vars() const { return vars_; }

  ForwardResult<T> forward(const SampleInput<T>& s) const {
    std::optional<Var> wav;
    if (s.wav) wav = tape_.leaf(*s.wav);
    return forward_bound(tape_.leaf(s.ssl), wav, s.lang, s.task);
  }

  ForwardResult<T> forward_bound(Var ssl, std::optional<Var> wav, std::size_t lang,
                                 TaskType task) const {
    const T eps = static_cast<T>(cfg_.norm_eps);
    // copy shapes up front; tape.value() references go stale as nodes append
    const std::vector<std::size_t> ssl_shape = tape_.value(ssl).shape;
    if (ssl_shape.size() != 2 || ssl_shape[1] != cfg_.d_ssl)
      throw DimensionError("forward: ssl features " + Tensor<T>::shape_str(ssl_shape) +
                           " do not match configured d_ssl=" + std::to_string(cfg_.d_ssl));

    Var x = tape_.layer_norm(ssl, param("fusion.ssl.gain"), param("fusion.ssl.bias"), eps);
    if (!ab_.wavelet) {
      if (!wav)
        throw InputError("forward: wavelet stream missing but wavelet fusion is enabled");
      const std::vector<std::size_t> wav_shape = tape_.value(*wav).shape;
      if (wav_shape[1] != cfg_.d_wav || wav_shape[0] != ssl_shape[0])
        throw DimensionError("forward: wavelet features " + Tensor<T>::shape_str(wav_shape) +
                             " do not align with ssl " + Tensor<T>::shape_str(ssl_shape));
      Var wn = tape_.layer_norm(*wav, param("fusion.wav.gain"), param("fusion.wav.bias"), eps);
      x = tape_.concat_cols(x, wn);
    }

    Var lang_vec{};
    if (!ab_.adaptive_layers && !cfg_.placements.empty())
      lang_vec = tape_.embed_row(param("lang.embed"), lang);

    auto adaptive = [&](std::size_t index, Var z) {
      Var zn = tape_.standardize_cols(z, eps);
      const std::string p = "adaptive" + std::to_string(index);
      Var gamma = tape_.dense(lang_vec, param(p + ".g.weight"), param(p + ".g.bias"));
      Var beta = tape_.dense(lang_vec, param(p + ".h.weight"), param(p + ".h.bias"));
      return tape_.col_affine(zn, gamma, beta);
    };

    if (!ab_.adaptive_layers)
      for (std::size_t i = 0; i < cfg_.placements.size(); ++i)
        if (cfg_.placements[i] == Placement::AfterFusion) x = adaptive(i, x);

    if (!ab_.bottleneck) {
      for (std::size_t b = 0; b < cfg_.n_bottleneck; ++b) {
        const std::string p = "bottleneck" + std::to_string(b);
        Var c = tape_.relu(tape_.conv1d_same(x, param(p + ".w1"), param(p + ".b1")));
        Var e = tape_.conv1d_same(c, param(p + ".w2"), param(p + ".b2"));
        x = tape_.add(tape_.mul(tape_.sigmoid(e), x), x);
      }
    }

    if (!ab_.adaptive_layers)
      for (std::size_t i = 0; i < cfg_.placements.size(); ++i)
        if (cfg_.placements[i] == Placement::AfterBottleneck) x = adaptive(i, x);

    const std::string hp = head_prefix(task, ab_);
    Var scores = tape_.matvec(x, param(hp + ".query"));
    Var weights = tape_.softmax(scores);
    Var pooled = tape_.vecmat(weights, x);
    Var h1 = tape_.relu(tape_.dense(pooled, param(hp + ".fc1.weight"), param(hp + ".fc1.bias")));
    Var logit = tape_.dense(h1, param(hp + ".fc2.weight"), param(hp + ".fc2.bias"));
    Var prob = tape_.sigmoid(logit);
    return {prob, pooled, weights};
  }

private:
  Tape<T>& tape_;
  const ParamStore<T>& params_;
  const ModelConfig& cfg_;
  const Ablation& ab_;
  std::vector<Var> vars_;
};

} // namespace bdhpd

#endif
