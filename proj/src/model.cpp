#include "bdhpd/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace bdhpd {

LanguageRegistry LanguageRegistry::from_names(std::vector<std::string> names) {
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  LanguageRegistry reg;
  for (std::size_t i = 0; i < names.size(); ++i) reg.index_[names[i]] = i;
  reg.names_ = std::move(names);
  return reg;
}

std::size_t LanguageRegistry::index_of(const std::string& dataset) const {
  auto it = index_.find(dataset);
  if (it == index_.end()) {
    std::ostringstream os;
    os << "language registry: unknown dataset '" << dataset << "' (registered:";
    for (const auto& n : names_) os << " " << n;
    os << "); use --lang-map to map it onto a trained language";
    throw LookupError(os.str());
  }
  return it->second;
}

bool LanguageRegistry::contains(const std::string& dataset) const {
  return index_.count(dataset) != 0;
}

std::vector<Placement> placements_from_string(const std::string& csv) {
  std::vector<Placement> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "after_fusion")
      out.push_back(Placement::AfterFusion);
    else if (item == "after_bottleneck")
      out.push_back(Placement::AfterBottleneck);
    else
      throw ConfigError("model.placements: unknown placement '" + item +
                        "' (after_fusion, after_bottleneck)");
  }
  return out;
}

std::string to_string(const std::vector<Placement>& ps) {
  std::string out;
  for (const Placement& p : ps) {
    if (!out.empty()) out += ",";
    out += p == Placement::AfterFusion ? "after_fusion" : "after_bottleneck";
  }
  return out;
}

const std::vector<std::string>& Ablation::all_component_names() {
  static const std::vector<std::string> names = {
      "dual_head", "adaptive_layers", "bottleneck", "wavelet", "contrastive"};
  return names;
}

Ablation Ablation::from_components(const std::vector<std::string>& names) {
  Ablation ab;
  for (const std::string& n : names) {
    if (n == "dual_head")
      ab.dual_head = true;
    else if (n == "adaptive_layers")
      ab.adaptive_layers = true;
    else if (n == "bottleneck")
      ab.bottleneck = true;
    else if (n == "wavelet")
      ab.wavelet = true;
    else if (n == "contrastive")
      ab.contrastive = true;
    else {
      std::ostringstream os;
      os << "unknown ablation component '" << n << "' (known:";
      for (const auto& k : all_component_names()) os << " " << k;
      os << ")";
      throw UsageError(os.str());
    }
  }
  return ab;
}

std::vector<std::string> Ablation::components() const {
  std::vector<std::string> out;
  if (dual_head) out.push_back("dual_head");
  if (adaptive_layers) out.push_back("adaptive_layers");
  if (bottleneck) out.push_back("bottleneck");
  if (wavelet) out.push_back("wavelet");
  if (contrastive) out.push_back("contrastive");
  return out;
}

void ModelConfig::validate() const {
  if (d_ssl == 0) throw ConfigError("model: d_ssl must be positive");
  if (hidden == 0) throw ConfigError("model.hidden: must be positive");
  if (embed_dim == 0) throw ConfigError("model.embed_dim: must be positive");
  if (ratio == 0) throw ConfigError("model.ratio: must be positive");
  if (kernel % 2 == 0)
    throw ConfigError("model.kernel: must be odd, got " + std::to_string(kernel));
  if (norm_eps <= 0) throw ConfigError("model.norm_eps: must be positive");
  if (ratio > d_ssl)
    throw ConfigError("model.ratio: " + std::to_string(ratio) +
                      " exceeds the feature dimension");
}

std::string head_prefix(TaskType task, const Ablation& ab) {
  if (ab.dual_head) return "head.shared";
  return task == TaskType::DDK ? "head.ddk" : "head.speech";
}

namespace {

TensorF fan_in_uniform(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
  TensorF t = TensorF::zeros(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (float& v : t.data) v = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

void add_head(ParamStore<float>& ps, const std::string& prefix, std::size_t d,
              std::size_t hidden, Rng& rng) {
  ps.add(prefix + ".query", TensorF::zeros({d}));
  ps.add(prefix + ".fc1.weight", fan_in_uniform({d, hidden}, d, rng));
  ps.add(prefix + ".fc1.bias", TensorF::zeros({hidden}));
  ps.add(prefix + ".fc2.weight", fan_in_uniform({hidden, 1}, hidden, rng));
  ps.add(prefix + ".fc2.bias", TensorF::zeros({1}));
}

} // namespace

ParamStore<float> init_params(const ModelConfig& cfg, std::size_t n_lang,
                              const Ablation& ab, std::uint64_t seed) {
  cfg.validate();
  if (n_lang == 0) throw ConfigError("init_params: need at least one language");
  Rng rng(derive_seed(seed, /*stream=*/0x494e4954)); // "INIT"
  ParamStore<float> ps;
  const std::size_t d = cfg.feature_dim(ab);

  ps.add("fusion.ssl.gain", TensorF::full({cfg.d_ssl}, 1.0f));
  ps.add("fusion.ssl.bias", TensorF::zeros({cfg.d_ssl}));
  if (!ab.wavelet) {
    ps.add("fusion.wav.gain", TensorF::full({cfg.d_wav}, 1.0f));
    ps.add("fusion.wav.bias", TensorF::zeros({cfg.d_wav}));
  }

  if (!ab.adaptive_layers && !cfg.placements.empty()) {
    TensorF embed = TensorF::zeros({n_lang, cfg.embed_dim});
    for (float& v : embed.data) v = static_cast<float>(0.1 * rng.normal());
    ps.add("lang.embed", std::move(embed));
    for (std::size_t i = 0; i < cfg.placements.size(); ++i) {
      const std::string p = "adaptive" + std::to_string(i);
      ps.add(p + ".g.weight", fan_in_uniform({cfg.embed_dim, d}, cfg.embed_dim, rng));
      ps.add(p + ".g.bias", TensorF::full({d}, 1.0f));
      ps.add(p + ".h.weight", fan_in_uniform({cfg.embed_dim, d}, cfg.embed_dim, rng));
      ps.add(p + ".h.bias", TensorF::zeros({d}));
    }
  }

  if (!ab.bottleneck) {
    const std::size_t c = cfg.compressed_dim(ab);
    for (std::size_t b = 0; b < cfg.n_bottleneck; ++b) {
      const std::string p = "bottleneck" + std::to_string(b);
      ps.add(p + ".w1", fan_in_uniform({cfg.kernel, d, c}, cfg.kernel * d, rng));
      ps.add(p + ".b1", TensorF::zeros({c}));
      ps.add(p + ".w2", fan_in_uniform({cfg.kernel, c, d}, cfg.kernel * c, rng));
      ps.add(p + ".b2", TensorF::zeros({d}));
    }
  }

  if (ab.dual_head) {
    add_head(ps, "head.shared", d, cfg.hidden, rng);
  } else {
    add_head(ps, "head.ddk", d, cfg.hidden, rng);
    add_head(ps, "head.speech", d, cfg.hidden, rng);
  }
  return ps;
}

} // namespace bdhpd
