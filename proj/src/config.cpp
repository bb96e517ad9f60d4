#include "bdhpd/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace bdhpd {

using nlohmann::json;

namespace {

struct KeyHandler {
  std::function<json(const RunSettings&)> get;
  std::function<void(RunSettings&, const json&)> set;
};

template <typename T, typename Member>
KeyHandler number_key(Member member, const char* key) {
  return {
      [member](const RunSettings& s) { return json(s.*member); },
      [member, key](RunSettings& s, const json& v) {
        if (!v.is_number())
          throw ConfigError(std::string(key) + ": expected a number, got " + v.dump());
        s.*member = v.get<T>();
      },
  };
}

#define NUM_FIELD(key, path, type)                                               \
  {                                                                               \
    key, KeyHandler {                                                             \
      [](const RunSettings& s) { return json(s.path); },                          \
          [](RunSettings& s, const json& v) {                                     \
            if (!v.is_number())                                                   \
              throw ConfigError(std::string(key) + ": expected a number, got " +  \
                                v.dump());                                        \
            s.path = v.get<type>();                                               \
          }                                                                       \
    }                                                                             \
  }

#define BOOL_FIELD(key, path)                                                     \
  {                                                                               \
    key, KeyHandler {                                                             \
      [](const RunSettings& s) { return json(s.path); },                          \
          [](RunSettings& s, const json& v) {                                     \
            if (!v.is_boolean())                                                  \
              throw ConfigError(std::string(key) + ": expected a boolean, got " + \
                                v.dump());                                        \
            s.path = v.get<bool>();                                               \
          }                                                                       \
    }                                                                             \
  }

#define STR_FIELD_EXPR(key, getter, setter)                                       \
  {                                                                               \
    key, KeyHandler {                                                             \
      [](const RunSettings& s) { return json(getter); },                          \
          [](RunSettings& s, const json& v) {                                     \
            if (!v.is_string())                                                   \
              throw ConfigError(std::string(key) + ": expected a string, got " +  \
                                v.dump());                                        \
            const std::string sv = v.get<std::string>();                          \
            setter;                                                               \
          }                                                                       \
    }                                                                             \
  }

const std::map<std::string, KeyHandler>& key_table() {
  static const std::map<std::string, KeyHandler> table = {
      NUM_FIELD("model.hidden", model.hidden, std::size_t),
      NUM_FIELD("model.ratio", model.ratio, std::size_t),
      NUM_FIELD("model.kernel", model.kernel, std::size_t),
      NUM_FIELD("model.embed_dim", model.embed_dim, std::size_t),
      NUM_FIELD("model.n_bottleneck", model.n_bottleneck, std::size_t),
      NUM_FIELD("model.norm_eps", model.norm_eps, double),
      STR_FIELD_EXPR("model.placements", to_string(s.model.placements),
                     s.model.placements = placements_from_string(sv)),
      STR_FIELD_EXPR("wavelet.family", to_string(s.wavelet.family),
                     s.wavelet.family = wavelet_family_from_string(sv)),
      NUM_FIELD("wavelet.levels", wavelet.levels, std::size_t),
      NUM_FIELD("wavelet.eps", wavelet.eps, double),
      NUM_FIELD("frame.window_ms", frame.window_ms, double),
      NUM_FIELD("frame.hop_ms", frame.hop_ms, double),
      NUM_FIELD("loss.m_pos", loss.m_pos, double),
      NUM_FIELD("loss.m_neg", loss.m_neg, double),
      NUM_FIELD("loss.lambda", loss.lambda, double),
      BOOL_FIELD("loss.hinge", loss.hinge),
      NUM_FIELD("train.epochs", train.epochs, std::size_t),
      NUM_FIELD("train.batch", train.batch_size, std::size_t),
      NUM_FIELD("train.max_lr", train.max_lr, double),
      NUM_FIELD("train.warmup_ratio", train.warmup_ratio, double),
      NUM_FIELD("train.patience", train.patience, std::size_t),
      NUM_FIELD("train.weight_decay", train.weight_decay, double),
      NUM_FIELD("train.clip_norm", train.clip_norm, double),
      NUM_FIELD("train.seed", train.seed, std::uint64_t),
      STR_FIELD_EXPR("train.ablate", s.ablate, s.ablate = sv),
      STR_FIELD_EXPR("data.dir", s.data_dir, s.data_dir = sv),
      STR_FIELD_EXPR("eval.checkpoint", s.eval_checkpoint, s.eval_checkpoint = sv),
      STR_FIELD_EXPR("eval.split", s.eval_split, s.eval_split = sv),
      NUM_FIELD("eval.threshold", eval_threshold, double),
      BOOL_FIELD("eval.speaker_vote", eval_speaker_vote),
      STR_FIELD_EXPR("export.task", s.export_task, s.export_task = sv),
      NUM_FIELD("gradcheck.seeds", gradcheck_seeds, std::size_t),
      NUM_FIELD("synth.seed", synth.seed, std::uint64_t),
      NUM_FIELD("synth.d_ssl", synth.d_ssl, std::size_t),
      NUM_FIELD("synth.utt_continuous", synth.utt_continuous, std::size_t),
      NUM_FIELD("synth.utt_ddk", synth.utt_ddk, std::size_t),
      NUM_FIELD("synth.cont_seconds", synth.cont_seconds, double),
      NUM_FIELD("synth.ddk_seconds", synth.ddk_seconds, double),
      NUM_FIELD("synth.sample_rate", synth.sample_rate, int),
      NUM_FIELD("synth.speakers_a_hc", synth.speakers_a_hc, std::size_t),
      NUM_FIELD("synth.speakers_a_pd", synth.speakers_a_pd, std::size_t),
      NUM_FIELD("synth.speakers_b_hc", synth.speakers_b_hc, std::size_t),
      NUM_FIELD("synth.speakers_b_pd", synth.speakers_b_pd, std::size_t),
      NUM_FIELD("synth.pd_effect", synth.pd_effect, double),
      NUM_FIELD("synth.task_effect", synth.task_effect, double),
      NUM_FIELD("synth.task_marker", synth.task_marker, double),
      NUM_FIELD("synth.lang_shift", synth.lang_shift, double),
      NUM_FIELD("synth.lang_scale", synth.lang_scale, double),
  };
  return table;
}

#undef NUM_FIELD
#undef BOOL_FIELD
#undef STR_FIELD_EXPR

void apply_json(RunSettings& s, const json& obj) {
  if (!obj.is_object()) throw ConfigError("config: expected a flat JSON object");
  for (const auto& [key, value] : obj.items()) {
    auto it = key_table().find(key);
    if (it == key_table().end()) throw ConfigError("config: unknown key '" + key + "'");
    it->second.set(s, value);
  }
}

} // namespace

std::vector<std::string> RunSettings::ablate_components() const {
  std::vector<std::string> out;
  std::stringstream ss(ablate);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

RunSettings load_settings(const std::optional<std::filesystem::path>& config_path,
                          const std::vector<std::string>& overrides) {
  RunSettings s;
  if (config_path) {
    std::ifstream in(*config_path);
    if (!in) throw ConfigError("config: cannot open " + config_path->string());
    json obj;
    try {
      obj = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("config: " + config_path->string() + ": " + e.what());
    }
    apply_json(s, obj);
  }
  for (const std::string& kv : overrides) apply_override(s, kv);
  return s;
}

void apply_override(RunSettings& s, const std::string& keyval) {
  const auto eq = keyval.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + keyval + "' is not of the form key=value");
  const std::string key = keyval.substr(0, eq);
  const std::string raw = keyval.substr(eq + 1);
  json value = json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (value.is_discarded() || (!value.is_number() && !value.is_boolean() && !value.is_string()))
    value = raw; // plain strings need no quoting on the command line
  json obj;
  obj[key] = value;
  apply_json(s, obj);
}

std::string resolved_config_json(const RunSettings& s) {
  json obj;
  for (const auto& [key, handler] : key_table()) obj[key] = handler.get(s);
  return obj.dump(2);
}

void write_resolved_config(const std::filesystem::path& path, const RunSettings& s) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw ConfigError("config: cannot write " + path.string());
  os << resolved_config_json(s) << "\n";
}

} // namespace bdhpd
