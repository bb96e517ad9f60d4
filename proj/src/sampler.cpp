#include "bdhpd/sampler.hpp"

#include <algorithm>
#include <map>

namespace bdhpd {

WeightedSampler WeightedSampler::build(const std::vector<ManifestEntry>& entries) {
  if (entries.empty()) throw ConfigError("sampler: empty manifest");
  std::map<std::string, std::array<std::size_t, 2>> counts;
  for (const ManifestEntry& e : entries) counts[e.dataset][e.label] += 1;
  for (const auto& [dataset, c] : counts)
    for (int label = 0; label < 2; ++label)
      if (c[label] == 0)
        throw ConfigError("sampler: empty cell (dataset=" + dataset +
                          ", label=" + std::to_string(label) + ")");
  WeightedSampler s;
  s.weights_.reserve(entries.size());
  s.cumulative_.reserve(entries.size());
  double acc = 0.0;
  for (const ManifestEntry& e : entries) {
    const auto& c = counts[e.dataset];
    const double dataset_size = static_cast<double>(c[0] + c[1]);
    const double w = dataset_size / (2.0 * static_cast<double>(c[e.label]));
    s.weights_.push_back(w);
    acc += w;
    s.cumulative_.push_back(acc);
  }
  return s;
}

std::size_t WeightedSampler::next(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());
  return std::min(i, cumulative_.size() - 1);
}

} // namespace bdhpd
