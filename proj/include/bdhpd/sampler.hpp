#ifndef BDHPD_SAMPLER_HPP
#define BDHPD_SAMPLER_HPP

#include <vector>

#include "bdhpd/manifest.hpp"
#include "bdhpd/rng.hpp"

namespace bdhpd {

// Draw-with-replacement index stream over a manifest. Entry weight is
// dataset_size / (2 * count(dataset, label)), so within every dataset the
// expected label frequency is uniform while datasets keep their size
// proportions. Requires both labels present in every dataset.
class WeightedSampler {
public:
  static WeightedSampler build(const std::vector<ManifestEntry>& entries);

  std::size_t next(Rng& rng) const;
  const std::vector<double>& weights() const { return weights_; }

private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

} // namespace bdhpd

#endif
