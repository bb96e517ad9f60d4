#include "bdhpd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <json.hpp>

#include "bdhpd/errors.hpp"
#include "bdhpd/ftrx.hpp"
#include "bdhpd/rng.hpp"
#include "bdhpd/wav_io.hpp"

namespace bdhpd {

namespace {

constexpr std::size_t kPdLo = 0, kPdHi = 8;       // PD signature dims
constexpr std::size_t kTaskLo = 8, kTaskHi = 16;  // DDK marker dims
constexpr std::size_t kShiftALo = 16, kShiftAHi = 24;
constexpr std::size_t kShiftBLo = 24, kShiftBHi = 32;
constexpr double kDdkSslFactor = 1.0; // DDK carries a weaker SSL signature;
                                      // the rest lives in the audio jitter
constexpr double kSpeakerSd = 0.25;
constexpr double kArRho = 0.9;
constexpr double kArSd = 0.3;
constexpr double kCohRho = 0.6;       // coherent streams on the PD dim pairs
constexpr double kCoherenceRatio = 1.54;  // coherence amplitude per unit pd_effect
constexpr double kPdEffectRef = 0.65;     // pd_effect value the motor deltas are tuned at
constexpr double kWhiteSd = 0.5;

struct LanguageSpec {
  std::string name;
  std::size_t n_hc = 0, n_pd = 0;
  double task_sign = 1.0;
  std::size_t shift_lo = 0, shift_hi = 0;
  bool scaled = false;      // language B scales the PD+task block
  double pd_confound = 0.0; // label-independent shift on the PD dims; lands
                            // this language's healthy baseline on the other
                            // language's PD offset under naive pooling
};

struct SpeakerSpec {
  std::string id;
  const LanguageSpec* lang = nullptr;
  int label = 0;
  std::size_t global_index = 0;
};

// Per-speaker articulation parameters; PD degrades all four, scaled by
// pd_effect so an effect size of zero removes the label dependence.
struct DdkMotor {
  double syllable_rate, jitter_sd, amp_sd, drop_prob, burst_hz;
};

DdkMotor motor_params(int label, double pd_effect, Rng& rng) {
  const double q = label == 1 ? pd_effect / kPdEffectRef : 0.0;
  DdkMotor m;
  m.syllable_rate = (6.5 - 1.0 * q) * std::exp(0.05 * rng.normal());
  m.jitter_sd = (0.01 + 0.06 * q) * std::exp(0.1 * rng.normal());
  m.amp_sd = (0.03 + 0.12 * q) * std::exp(0.1 * rng.normal());
  m.drop_prob = std::min(0.6, (0.02 + 0.23 * q) * std::exp(0.1 * rng.normal()));
  m.burst_hz = rng.uniform(350.0, 500.0);
  return m;
}

Waveform make_ddk_audio(double seconds, int rate, const DdkMotor& m, Rng& rng) {
  Waveform w;
  w.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(seconds * rate));
  w.samples.assign(n, 0.0);
  const double burst_len_s = 0.030, decay_s = 0.005;
  const std::size_t burst_len = static_cast<std::size_t>(burst_len_s * rate);
  double t = 0.02 * (1.0 + rng.uniform());
  while (t < seconds) {
    double amp = 0.5 * (1.0 + m.amp_sd * rng.normal());
    if (rng.uniform() < m.drop_prob) amp *= 0.15;
    const std::size_t start = static_cast<std::size_t>(t * rate);
    for (std::size_t i = 0; i < burst_len && start + i < n; ++i) {
      const double ts = static_cast<double>(i) / rate;
      w.samples[start + i] +=
          amp * std::sin(2.0 * 3.14159265358979323846 * m.burst_hz * ts) *
          std::exp(-ts / decay_s);
    }
    const double period = (1.0 / m.syllable_rate) * (1.0 + m.jitter_sd * rng.normal());
    t += std::max(period, 0.02);
  }
  for (double& s : w.samples) s = std::clamp(s + 0.004 * rng.normal(), -1.0, 1.0);
  return w;
}

Waveform make_continuous_audio(double seconds, int rate, Rng& rng) {
  Waveform w;
  w.sample_rate = rate;
  const std::size_t n = static_cast<std::size_t>(std::llround(seconds * rate));
  w.samples.resize(n);
  double state = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    state = 0.9 * state + 0.1 * rng.normal();
    w.samples[i] = std::clamp(0.12 * state * 8.0, -1.0, 1.0);
  }
  return w;
}

// The class signal rides on two carriers.
//   1. A constant offset on the PD dims: visible to mean pooling and to
//      models without adaptive layers, but erased by per-utterance channel
//      standardization.
//   2. Within-pair coherence on the PD dims: consecutive dims (2j, 2j+1)
//      share one slow latent stream, with the second dim's sign equal to
//      coherence_sign(label, task). Channel marginals are identical across
//      classes, so this carrier survives standardization and is readable
//      through attention (pooled ~ covariance * query), but its meaning
//      flips between tasks, which is exactly what a shared single head
//      cannot represent.
TensorF make_ssl(const SynthConfig& cfg, const SpeakerSpec& spk,
                 const std::vector<double>& spk_vec, TaskType task,
                 std::size_t frames, Rng& rng) {
  const std::size_t d = cfg.d_ssl;
  TensorF z = TensorF::zeros({frames, d});
  const bool ddk = task == TaskType::DDK;
  const double pd = static_cast<double>(spk.label) * cfg.pd_effect * (ddk ? kDdkSslFactor : 1.0);
  const double coh_sign = (spk.label == 1 ? 1.0 : -1.0) * (ddk ? -1.0 : 1.0);
  const double coh_amp = kCoherenceRatio * cfg.pd_effect;

  // one slow stream per dim pair, drawn up front in fixed order
  const std::size_t n_pairs = (kPdHi - kPdLo) / 2;
  std::vector<std::vector<double>> streams(n_pairs, std::vector<double>(frames));
  for (std::size_t j = 0; j < n_pairs; ++j) {
    double s = rng.normal();
    for (std::size_t t = 0; t < frames; ++t) {
      s = kCohRho * s + std::sqrt(1.0 - kCohRho * kCohRho) * rng.normal();
      streams[j][t] = s;
    }
  }

  for (std::size_t dim = 0; dim < d; ++dim) {
    double offset = spk_vec[dim];
    if (dim >= kPdLo && dim < kPdHi) {
      offset += pd + spk.lang->pd_confound;
      if (ddk) offset += spk.lang->task_sign * cfg.task_effect;
    }
    if (ddk && dim >= kTaskLo && dim < kTaskHi) offset += cfg.task_marker;
    const bool scaled = spk.lang->scaled && dim < kTaskHi;
    const double scale = scaled ? cfg.lang_scale : 1.0;
    const double shift =
        (dim >= spk.lang->shift_lo && dim < spk.lang->shift_hi) ? cfg.lang_shift : 0.0;
    const double* stream = nullptr;
    double stream_sign = 1.0;
    if (dim >= kPdLo && dim < kPdHi) {
      stream = streams[(dim - kPdLo) / 2].data();
      stream_sign = (dim - kPdLo) % 2 == 0 ? 1.0 : coh_sign;
    }
    double ar = kArSd * rng.normal();
    for (std::size_t t = 0; t < frames; ++t) {
      ar = kArRho * ar + std::sqrt(1.0 - kArRho * kArRho) * kArSd * rng.normal();
      double core = offset + ar + kWhiteSd * rng.normal();
      if (stream) core += coh_amp * stream_sign * stream[t];
      z(t, dim) = static_cast<float>(scale * core + shift);
    }
  }
  return z;
}

} // namespace

void SynthConfig::validate() const {
  if (d_ssl < kShiftBHi)
    throw ConfigError("synth.d_ssl: must be >= " + std::to_string(kShiftBHi) +
                      " to hold the effect dim blocks, got " + std::to_string(d_ssl));
  if (utt_continuous == 0 && utt_ddk == 0)
    throw ConfigError("synth: need at least one utterance per speaker");
  if (pd_effect < 0.0) throw ConfigError("synth.pd_effect: must be >= 0");
  if (lang_scale <= 0.0) throw ConfigError("synth.lang_scale: must be > 0");
  if (sample_rate <= 0) throw ConfigError("synth.sample_rate: must be positive");
  frame.validate();
  for (auto [name, n] : {std::pair<const char*, std::size_t>{"speakers_a_hc", speakers_a_hc},
                         {"speakers_a_pd", speakers_a_pd},
                         {"speakers_b_hc", speakers_b_hc},
                         {"speakers_b_pd", speakers_b_pd}})
    if (n < 4)
      throw ConfigError("synth." + std::string(name) +
                        ": need >= 4 speakers per (language,label) cell for a "
                        "70/10/20 speaker-disjoint split, got " + std::to_string(n));
  const double min_seconds = std::min(cont_seconds, ddk_seconds);
  if (frame_count(static_cast<std::size_t>(min_seconds * sample_rate), sample_rate, frame) < 2)
    throw ConfigError("synth: utterances too short for the frame geometry");
}

SynthSummary generate_synthetic_corpus(const SynthConfig& cfg,
                                       const std::filesystem::path& out_dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "features", ec);
  fs::create_directories(out_dir / "audio", ec);
  if (ec) throw InputError("synth: cannot create output directory " + out_dir.string());

  const LanguageSpec lang_a{"synthA", cfg.speakers_a_hc, cfg.speakers_a_pd,
                            +1.0, kShiftALo, kShiftAHi, false, 0.0};
  const LanguageSpec lang_b{"synthB", cfg.speakers_b_hc, cfg.speakers_b_pd,
                            -1.0, kShiftBLo, kShiftBHi, true,
                            cfg.pd_effect / cfg.lang_scale};

  std::vector<SpeakerSpec> speakers;
  std::size_t gi = 0;
  for (const LanguageSpec* lang : {&lang_a, &lang_b}) {
    const std::string tag = lang == &lang_a ? "a" : "b";
    for (int label = 0; label <= 1; ++label) {
      const std::size_t n = label == 0 ? lang->n_hc : lang->n_pd;
      for (std::size_t s = 0; s < n; ++s) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%s_%s_%03zu", tag.c_str(),
                      label == 0 ? "hc" : "pd", s);
        speakers.push_back({buf, lang, label, gi++});
      }
    }
  }

  std::vector<ManifestEntry> train, val, test;
  auto split_of = [](std::size_t idx, std::size_t n) -> int {
    const std::size_t n_train = static_cast<std::size_t>(0.7 * static_cast<double>(n));
    const std::size_t n_val = static_cast<std::size_t>(0.1 * static_cast<double>(n));
    if (idx < n_train) return 0;
    if (idx < n_train + std::max<std::size_t>(n_val, 1)) return 1;
    return 2;
  };

  // index within the speaker's (language,label) cell drives the split
  std::map<std::string, std::size_t> cell_counter;
  std::map<std::string, std::size_t> cell_total;
  for (const SpeakerSpec& s : speakers)
    cell_total[s.lang->name + std::to_string(s.label)] += 1;

  for (const SpeakerSpec& spk : speakers) {
    Rng spk_rng(derive_seed(cfg.seed, 0x53504bULL /*SPK*/, spk.global_index));
    std::vector<double> spk_vec(cfg.d_ssl);
    for (double& v : spk_vec) v = kSpeakerSd * spk_rng.normal();
    const DdkMotor motor = motor_params(spk.label, cfg.pd_effect, spk_rng);

    const std::string cell = spk.lang->name + std::to_string(spk.label);
    const std::size_t cell_idx = cell_counter[cell]++;
    std::vector<ManifestEntry>* dest = nullptr;
    switch (split_of(cell_idx, cell_total[cell])) {
      case 0: dest = &train; break;
      case 1: dest = &val; break;
      default: dest = &test; break;
    }

    auto emit = [&](TaskType task, std::size_t u, const Waveform& audio) {
      const std::string uid =
          spk.id + (task == TaskType::DDK ? "_ddk" : "_cont") + std::to_string(u);
      const std::size_t frames =
          frame_count(audio.samples.size(), audio.sample_rate, cfg.frame);
      Rng feat_rng(derive_seed(cfg.seed, 0x465254ULL /*FRT*/,
                               spk.global_index * 1024 + (task == TaskType::DDK ? 512 : 0) + u));
      const TensorF ssl = make_ssl(cfg, spk, spk_vec, task, frames, feat_rng);
      write_matrix(out_dir / "features" / (uid + ".ftrx"), ssl);
      write_audio(out_dir / "audio" / (uid + ".wav"), audio);
      ManifestEntry e;
      e.utterance_id = uid;
      e.speaker_id = spk.id;
      e.dataset = spk.lang->name;
      e.task = task;
      e.label = spk.label;
      e.audio_path = "audio/" + uid + ".wav";
      e.ssl_feature_path = "features/" + uid + ".ftrx";
      dest->push_back(std::move(e));
    };

    for (std::size_t u = 0; u < cfg.utt_continuous; ++u) {
      Rng audio_rng(derive_seed(cfg.seed, 0x415544ULL /*AUD*/, spk.global_index * 1024 + u));
      emit(TaskType::ContinuousSpeech, u,
           make_continuous_audio(cfg.cont_seconds, cfg.sample_rate, audio_rng));
    }
    for (std::size_t u = 0; u < cfg.utt_ddk; ++u) {
      Rng audio_rng(derive_seed(cfg.seed, 0x415544ULL, spk.global_index * 1024 + 512 + u));
      emit(TaskType::DDK, u,
           make_ddk_audio(cfg.ddk_seconds, cfg.sample_rate, motor, audio_rng));
    }
  }

  write_manifest(out_dir / "manifest_train.jsonl", train);
  write_manifest(out_dir / "manifest_val.jsonl", val);
  write_manifest(out_dir / "manifest_test.jsonl", test);

  nlohmann::json dims;
  dims["pd_dims"] = {kPdLo, kPdHi};
  dims["task_marker_dims"] = {kTaskLo, kTaskHi};
  dims["lang_shift_dims"]["synthA"] = {kShiftALo, kShiftAHi};
  dims["lang_shift_dims"]["synthB"] = {kShiftBLo, kShiftBHi};
  dims["lang_scale_dims"]["synthB"] = {kPdLo, kTaskHi};
  dims["lang_pd_confound"]["synthB"] = cfg.pd_effect / cfg.lang_scale;
  dims["pd_effect"] = cfg.pd_effect;
  dims["task_effect"] = cfg.task_effect;
  dims["task_marker"] = cfg.task_marker;
  dims["lang_shift"] = cfg.lang_shift;
  dims["lang_scale"] = cfg.lang_scale;
  dims["ddk_ssl_factor"] = kDdkSslFactor;
  dims["note"] =
      "dims are [lo, hi) blocks of the SSL feature space; the PD block is "
      "shared across languages, the DDK offset on it flips sign between "
      "languages, shift/scale blocks are language-specific";
  std::ofstream os(out_dir / "dim_map.json");
  os << dims.dump(2) << "\n";

  return {train.size(), val.size(), test.size()};
}

} // namespace bdhpd
