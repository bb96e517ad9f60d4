#ifndef BDHPD_CORPUS_HPP
#define BDHPD_CORPUS_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bdhpd/features.hpp"
#include "bdhpd/manifest.hpp"
#include "bdhpd/model.hpp"

namespace bdhpd {

// One utterance, featurized and cached in memory: SSL matrix plus the
// aligned per-frame wavelet statistics (absent when wavelet fusion is off).
struct LoadedSample {
  ManifestEntry meta;
  TensorF ssl;
  std::optional<TensorF> wav;
  std::size_t lang = 0;
};

struct Corpus {
  std::vector<LoadedSample> train, val, test;
  LanguageRegistry languages;
  std::size_t d_ssl = 0;
  std::size_t d_wav = 0;
};

// Featurize every entry of one manifest. Language indices are filled from
// `registry` after applying `lang_map` (dataset -> registered language).
std::vector<LoadedSample> load_split(
    const std::filesystem::path& manifest_path, const FrameConfig& fc,
    const WaveletConfig& wc, bool with_wavelet, const LanguageRegistry& registry,
    const std::map<std::string, std::string>& lang_map = {});

// Load manifest_{train,val,test}.jsonl from a corpus directory. The language
// registry is built from the train manifest. Splits are checked to be
// speaker-disjoint within each dataset.
Corpus load_corpus(const std::filesystem::path& dir, const FrameConfig& fc,
                   const WaveletConfig& wc, bool with_wavelet);

} // namespace bdhpd

#endif
