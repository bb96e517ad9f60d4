#ifndef BDHPD_GRADCHECK_SUITE_HPP
#define BDHPD_GRADCHECK_SUITE_HPP

#include <string>
#include <vector>

namespace bdhpd {

struct LayerGradReport {
  std::string layer;
  double max_rel_err = 0.0;
};

// Finite-difference validation of every layer type plus the full
// forward+total-loss graph, at 64-bit precision, `seeds` random instances
// each. The full-graph entry uses a small two-language, mixed-task batch so
// fusion, adaptive layers, bottleneck, both heads, BCE and both contrastive
// terms are all on the differentiated path.
std::vector<LayerGradReport> run_gradcheck_suite(std::size_t seeds);

} // namespace bdhpd

#endif
