#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <fstream>

#include "bdhpd/ftrx.hpp"
#include "bdhpd/manifest.hpp"
#include "bdhpd/synth.hpp"
#include "bdhpd/wav_io.hpp"
#include "support/corpus_fixture.hpp"
#include "support/oracles.hpp"

using namespace bdhpd;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const std::filesystem::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  os << content;
}

std::vector<std::vector<double>> mean_pooled(const std::vector<LoadedSample>& split) {
  std::vector<std::vector<double>> out;
  for (const auto& s : split) {
    std::vector<double> m(s.ssl.cols(), 0.0);
    for (std::size_t t = 0; t < s.ssl.rows(); ++t)
      for (std::size_t j = 0; j < s.ssl.cols(); ++j) m[j] += s.ssl(t, j);
    for (double& v : m) v /= double(s.ssl.rows());
    out.push_back(std::move(m));
  }
  return out;
}

} // namespace

TEST_CASE("manifest: parsing, validation, round trip") {
  const auto dir = fixture::fresh_dir("manifest");

  SUBCASE("empty file loads as an empty list") {
    spit(dir / "empty.jsonl", "");
    CHECK(load_manifest(dir / "empty.jsonl").empty());
  }

  SUBCASE("missing task is a parse error carrying the line number") {
    spit(dir / "bad.jsonl",
         R"({"utterance_id":"u1","speaker_id":"s1","dataset":"d","task":"ddk","label":0,"ssl_feature_path":"x"})"
         "\n"
         R"({"utterance_id":"u2","speaker_id":"s1","dataset":"d","label":0,"ssl_feature_path":"x"})"
         "\n");
    try {
      load_manifest(dir / "bad.jsonl");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(":2") != std::string::npos);
      CHECK(msg.find("task") != std::string::npos);
    }
  }

  SUBCASE("duplicate utterance ids are rejected") {
    const std::string line =
        R"({"utterance_id":"u1","speaker_id":"s1","dataset":"d","task":"ddk","label":1,"ssl_feature_path":"x"})";
    spit(dir / "dup.jsonl", line + "\n" + line + "\n");
    CHECK_THROWS_AS(load_manifest(dir / "dup.jsonl"), ParseError);
  }

  SUBCASE("unknown keys are rejected") {
    spit(dir / "unk.jsonl",
         R"({"utterance_id":"u1","speaker_id":"s1","dataset":"d","task":"ddk","label":0,"ssl_feature_path":"x","extra":1})"
         "\n");
    CHECK_THROWS_AS(load_manifest(dir / "unk.jsonl"), ParseError);
  }

  SUBCASE("an entry without any payload path is invalid") {
    spit(dir / "nopay.jsonl",
         R"({"utterance_id":"u1","speaker_id":"s1","dataset":"d","task":"ddk","label":0})"
         "\n");
    CHECK_THROWS_AS(load_manifest(dir / "nopay.jsonl"), ParseError);
  }

  SUBCASE("write then load is the identity") {
    std::vector<ManifestEntry> entries;
    ManifestEntry a;
    a.utterance_id = "utt1";
    a.speaker_id = "spk1";
    a.dataset = "synthA";
    a.task = TaskType::DDK;
    a.label = 1;
    a.audio_path = "audio/utt1.wav";
    a.ssl_feature_path = "features/utt1.ftrx";
    ManifestEntry b = a;
    b.utterance_id = "utt2";
    b.task = TaskType::ContinuousSpeech;
    b.label = 0;
    b.audio_path.clear(); // optional field absent
    entries = {a, b};
    write_manifest(dir / "rt.jsonl", entries);
    const auto loaded = load_manifest(dir / "rt.jsonl");
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].utterance_id == "utt1");
    CHECK(loaded[0].audio_path == "audio/utt1.wav");
    CHECK(loaded[1].task == TaskType::ContinuousSpeech);
    CHECK(loaded[1].audio_path.empty());
    write_manifest(dir / "rt2.jsonl", loaded);
    CHECK(slurp(dir / "rt.jsonl") == slurp(dir / "rt2.jsonl"));
  }
}

TEST_CASE("wav: scaling, round trip, format errors") {
  const auto dir = fixture::fresh_dir("wav");

  SUBCASE("silence reads back as one second of zeros") {
    Waveform w;
    w.sample_rate = 16000;
    w.samples.assign(16000, 0.0);
    write_audio(dir / "silence.wav", w);
    const Waveform r = read_audio(dir / "silence.wav");
    CHECK(r.sample_rate == 16000);
    REQUIRE(r.samples.size() == 16000);
    for (double v : r.samples) CHECK(v == 0.0);
  }

  SUBCASE("a full-scale square wave hits +-32767/32768") {
    Waveform w;
    w.sample_rate = 8000;
    for (int i = 0; i < 64; ++i) w.samples.push_back(i % 2 ? 1.0 : -1.0);
    write_audio(dir / "square.wav", w);
    const Waveform r = read_audio(dir / "square.wav");
    for (std::size_t i = 0; i < r.samples.size(); ++i) {
      if (i % 2)
        CHECK(r.samples[i] == doctest::Approx(32767.0 / 32768.0));
      else
        CHECK(r.samples[i] == doctest::Approx(-1.0));
    }
  }

  SUBCASE("round trip is within one quantization step") {
    Rng rng(5);
    Waveform w;
    w.sample_rate = 16000;
    for (int i = 0; i < 4000; ++i)
      w.samples.push_back(std::clamp(0.4 * rng.normal(), -1.0, 1.0));
    write_audio(dir / "rt.wav", w);
    const Waveform r = read_audio(dir / "rt.wav");
    REQUIRE(r.samples.size() == w.samples.size());
    for (std::size_t i = 0; i < w.samples.size(); ++i)
      CHECK(std::fabs(r.samples[i] - w.samples[i]) <= 1.0 / 32768.0);
  }

  SUBCASE("stereo is rejected naming the channels field") {
    std::string bytes = slurp(dir / "silence.wav");
    if (bytes.empty()) {
      Waveform w;
      w.sample_rate = 16000;
      w.samples.assign(100, 0.0);
      write_audio(dir / "silence.wav", w);
      bytes = slurp(dir / "silence.wav");
    }
    bytes[22] = 2; // channels field in the fmt chunk
    spit(dir / "stereo.wav", bytes);
    try {
      read_audio(dir / "stereo.wav");
      FAIL("expected FormatError");
    } catch (const FormatError& e) {
      CHECK(std::string(e.what()).find("channels") != std::string::npos);
    }
  }

  SUBCASE("non-RIFF input is rejected") {
    spit(dir / "junk.wav", "definitely not a wav file");
    CHECK_THROWS_AS(read_audio(dir / "junk.wav"), FormatError);
  }
}

TEST_CASE("ftrx: size formula, bit-exact round trip, corruption") {
  const auto dir = fixture::fresh_dir("ftrx");

  SUBCASE("a 1x1 matrix serializes to 16 bytes") {
    write_matrix(dir / "one.ftrx", TensorF::matrix(1, 1, {0.0f}));
    CHECK(std::filesystem::file_size(dir / "one.ftrx") == 16);
  }

  SUBCASE("random 50x768 round trip is bit-exact") {
    Rng rng(17);
    TensorF m = TensorF::zeros({50, 768});
    for (float& v : m.data) v = float(rng.normal());
    write_matrix(dir / "big.ftrx", m);
    const TensorF r = read_matrix(dir / "big.ftrx");
    CHECK(r.shape == m.shape);
    CHECK(std::memcmp(r.data.data(), m.data.data(), 4 * m.size()) == 0);
    CHECK(std::filesystem::file_size(dir / "big.ftrx") == 12 + 4 * 50 * 768);
  }

  SUBCASE("zero dimensions are rejected") {
    TensorF empty = TensorF::zeros({3, 0});
    CHECK_THROWS_AS(write_matrix(dir / "zero.ftrx", empty), FormatError);
  }

  SUBCASE("bad magic and truncation are format errors") {
    write_matrix(dir / "ok.ftrx", TensorF::matrix(2, 2, {1, 2, 3, 4}));
    std::string bytes = slurp(dir / "ok.ftrx");
    std::string corrupted = bytes;
    corrupted[0] = 'X';
    spit(dir / "badmagic.ftrx", corrupted);
    CHECK_THROWS_AS(read_matrix(dir / "badmagic.ftrx"), FormatError);
    spit(dir / "trunc.ftrx", bytes.substr(0, bytes.size() - 3));
    CHECK_THROWS_AS(read_matrix(dir / "trunc.ftrx"), FormatError);
  }
}

TEST_CASE("synthetic corpus: determinism and split hygiene") {
  const auto dir_a = fixture::fresh_dir("synth_a");
  const auto dir_b = fixture::fresh_dir("synth_b");
  const SynthConfig cfg = fixture::small_synth(21);
  generate_synthetic_corpus(cfg, dir_a);
  generate_synthetic_corpus(cfg, dir_b);

  SUBCASE("same seed gives a byte-identical tree") {
    std::size_t files = 0;
    for (const auto& e : std::filesystem::recursive_directory_iterator(dir_a)) {
      if (!e.is_regular_file()) continue;
      ++files;
      const auto rel = std::filesystem::relative(e.path(), dir_a);
      CHECK(slurp(e.path()) == slurp(dir_b / rel));
    }
    CHECK(files > 30); // manifests + dim map + per-utterance payloads
  }

  SUBCASE("speaker-disjoint splits load cleanly; leakage is rejected") {
    const Corpus c = load_corpus(dir_a, cfg.frame, WaveletConfig{}, true);
    CHECK(c.d_ssl == 64);
    CHECK(c.d_wav == 18);
    CHECK(c.languages.size() == 2);
    // corrupt: copy a train speaker's row into the test manifest
    auto train = load_manifest(dir_a / "manifest_train.jsonl");
    auto test = load_manifest(dir_a / "manifest_test.jsonl");
    ManifestEntry leak = train.front();
    leak.utterance_id = "leaked";
    test.push_back(leak);
    write_manifest(dir_a / "manifest_test.jsonl", test);
    CHECK_THROWS_AS(load_corpus(dir_a, cfg.frame, WaveletConfig{}, true), InputError);
  }
}

TEST_CASE("synthetic corpus: statistical structure") {
  const auto dir = fixture::fresh_dir("synth_stats");
  SynthConfig cfg; // full defaults: the learnability contract is about
  cfg.seed = 7;    // the corpus the pipeline actually trains on
  generate_synthetic_corpus(cfg, dir);
  const Corpus c = load_corpus(dir, cfg.frame, WaveletConfig{}, false);

  SUBCASE("language gap is real: a language probe exceeds 95%") {
    std::vector<std::vector<double>> xs = mean_pooled(c.train);
    std::vector<int> ys;
    for (const auto& s : c.train) ys.push_back(s.meta.dataset == "synthB" ? 1 : 0);
    std::vector<std::vector<double>> xt = mean_pooled(c.test);
    std::vector<int> yt;
    for (const auto& s : c.test) yt.push_back(s.meta.dataset == "synthB" ? 1 : 0);
    CHECK(oracles::logistic_probe(xs, ys, xt, yt) > 95.0);
  }

  SUBCASE("task is learnable in-language: mean-pooled linear probe >= 85%") {
    for (const std::string lang : {"synthA", "synthB"}) {
      std::vector<std::vector<double>> xs, xt;
      std::vector<int> ys, yt;
      for (const auto& s : c.train)
        if (s.meta.dataset == lang) {
          xs.push_back(mean_pooled({s})[0]);
          ys.push_back(s.meta.label);
        }
      for (const auto& s : c.test)
        if (s.meta.dataset == lang) {
          xt.push_back(mean_pooled({s})[0]);
          yt.push_back(s.meta.label);
        }
      INFO(lang);
      CHECK(oracles::logistic_probe(xs, ys, xt, yt) >= 85.0);
    }
  }

  SUBCASE("dim map documents the effect layout") {
    const std::string dm = slurp(dir / "dim_map.json");
    CHECK(dm.find("pd_dims") != std::string::npos);
    CHECK(dm.find("lang_shift_dims") != std::string::npos);
  }
}

TEST_CASE("pd_effect zero removes the label signal") {
  const auto dir = fixture::fresh_dir("synth_null");
  SynthConfig cfg = fixture::small_synth(31);
  cfg.speakers_a_hc = 10;
  cfg.speakers_a_pd = 10;
  cfg.pd_effect = 0.0;
  generate_synthetic_corpus(cfg, dir);
  const Corpus c = load_corpus(dir, cfg.frame, WaveletConfig{}, true);

  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  for (const auto* split : {&c.train, &c.val, &c.test})
    for (const auto& s : *split) {
      if (s.meta.dataset != "synthA") continue;
      // pool both streams so audio-derived features are covered too
      std::vector<double> row = mean_pooled({s})[0];
      for (std::size_t j = 0; j < s.wav->cols(); ++j) {
        double m = 0.0;
        for (std::size_t t = 0; t < s.wav->rows(); ++t) m += (*s.wav)(t, j);
        row.push_back(m / double(s.wav->rows()));
      }
      xs.push_back(std::move(row));
      ys.push_back(s.meta.label);
    }
  const double p = oracles::permutation_pvalue(xs, ys, 400, 555);
  CHECK(p > 0.01);
}
