#ifndef BDHPD_ABLATION_HPP
#define BDHPD_ABLATION_HPP

#include "bdhpd/trainer.hpp"

namespace bdhpd {

struct AblationRow {
  std::string removed; // "full" or the removed component
  std::map<std::string, double> macro_f1; // per dataset, test split
  double pooled_macro_f1 = 0.0;
};

// Trains the full model plus one run per removed component, all with the
// same seed, and reports test macro-F1 per dataset. An empty component list
// produces the full-model row only.
std::vector<AblationRow> run_ablation(const Corpus& corpus, const ModelConfig& model,
                                      const TrainConfig& train,
                                      const ContrastiveConfig& loss_cfg,
                                      const WaveletConfig& wavelet, const FrameConfig& frame,
                                      const std::vector<std::string>& components,
                                      std::ostream* log = nullptr);

// Human-readable table with per-dataset deltas against the full row.
std::string format_ablation_table(const std::vector<AblationRow>& rows);

// Machine-readable TSV: removed, dataset, macro_f1, delta_vs_full.
void write_ablation_tsv(const std::filesystem::path& path,
                        const std::vector<AblationRow>& rows);

} // namespace bdhpd

#endif
