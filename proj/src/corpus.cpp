#include "bdhpd/corpus.hpp"

#include <set>

#include "bdhpd/errors.hpp"
#include "bdhpd/ftrx.hpp"
#include "bdhpd/wav_io.hpp"

namespace bdhpd {

namespace {

LoadedSample featurize(const ManifestEntry& e, const std::filesystem::path& manifest_path,
                       const FrameConfig& fc, const WaveletConfig& wc, bool with_wavelet) {
  LoadedSample s;
  s.meta = e;
  if (e.ssl_feature_path.empty())
    throw InputError("corpus: entry " + e.utterance_id + " has no ssl_feature_path");
  s.ssl = read_matrix(resolve_path(manifest_path, e.ssl_feature_path));
  if (with_wavelet) {
    if (e.audio_path.empty())
      throw InputError("corpus: entry " + e.utterance_id +
                       " has no audio_path but wavelet fusion is enabled");
    const Waveform w = read_audio(resolve_path(manifest_path, e.audio_path));
    FeatureSequence wav = wavelet_sequence(w, fc, wc);
    // align by truncation to the shorter stream
    const std::size_t t = std::min(s.ssl.rows(), wav.matrix.rows());
    if (t == 0) throw InputError("corpus: entry " + e.utterance_id + " has no frames");
    auto truncate = [t](TensorF& m) {
      if (m.shape[0] == t) return;
      m.data.resize(t * m.shape[1]);
      m.shape[0] = t;
    };
    truncate(s.ssl);
    truncate(wav.matrix);
    s.wav = std::move(wav.matrix);
  }
  return s;
}

} // namespace

std::vector<LoadedSample> load_split(
    const std::filesystem::path& manifest_path, const FrameConfig& fc,
    const WaveletConfig& wc, bool with_wavelet, const LanguageRegistry& registry,
    const std::map<std::string, std::string>& lang_map) {
  std::vector<LoadedSample> out;
  for (const ManifestEntry& e : load_manifest(manifest_path)) {
    LoadedSample s = featurize(e, manifest_path, fc, wc, with_wavelet);
    auto mapped = lang_map.find(e.dataset);
    s.lang = registry.index_of(mapped == lang_map.end() ? e.dataset : mapped->second);
    out.push_back(std::move(s));
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& dir, const FrameConfig& fc,
                   const WaveletConfig& wc, bool with_wavelet) {
  const auto train_manifest = dir / "manifest_train.jsonl";
  const auto train_entries = load_manifest(train_manifest);
  if (train_entries.empty()) throw InputError("corpus: empty train manifest in " + dir.string());

  std::vector<std::string> datasets;
  for (const auto& e : train_entries) datasets.push_back(e.dataset);
  Corpus c;
  c.languages = LanguageRegistry::from_names(std::move(datasets));

  c.train = load_split(train_manifest, fc, wc, with_wavelet, c.languages);
  c.val = load_split(dir / "manifest_val.jsonl", fc, wc, with_wavelet, c.languages);
  c.test = load_split(dir / "manifest_test.jsonl", fc, wc, with_wavelet, c.languages);

  // speaker-disjoint splits within each dataset
  std::map<std::string, std::set<std::string>> seen_train, seen_val;
  for (const auto& s : c.train) seen_train[s.meta.dataset].insert(s.meta.speaker_id);
  for (const auto& s : c.val) {
    if (seen_train[s.meta.dataset].count(s.meta.speaker_id))
      throw InputError("corpus: speaker " + s.meta.speaker_id +
                       " appears in both train and val of " + s.meta.dataset);
    seen_val[s.meta.dataset].insert(s.meta.speaker_id);
  }
  for (const auto& s : c.test)
    if (seen_train[s.meta.dataset].count(s.meta.speaker_id) ||
        seen_val[s.meta.dataset].count(s.meta.speaker_id))
      throw InputError("corpus: speaker " + s.meta.speaker_id +
                       " leaks into the test split of " + s.meta.dataset);

  c.d_ssl = c.train.front().ssl.cols();
  c.d_wav = with_wavelet ? c.train.front().wav->cols() : 0;
  for (const auto* split : {&c.train, &c.val, &c.test})
    for (const auto& s : *split) {
      if (s.ssl.cols() != c.d_ssl)
        throw InputError("corpus: inconsistent ssl dimension in " + s.meta.utterance_id);
      if (with_wavelet && s.wav->cols() != c.d_wav)
        throw InputError("corpus: inconsistent wavelet dimension in " + s.meta.utterance_id);
    }
  return c;
}

} // namespace bdhpd
