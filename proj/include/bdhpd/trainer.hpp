#ifndef BDHPD_TRAINER_HPP
#define BDHPD_TRAINER_HPP

#include <filesystem>
#include <iosfwd>
#include <map>

#include "bdhpd/checkpoint.hpp"
#include "bdhpd/corpus.hpp"
#include "bdhpd/evaluate.hpp"
#include "bdhpd/losses.hpp"
#include "bdhpd/optim.hpp"

namespace bdhpd {

struct TrainConfig {
  std::size_t epochs = 20;
  std::size_t batch_size = 64;
  double max_lr = 1e-4;
  double warmup_ratio = 0.1;
  std::size_t patience = 5; // early stop after this many non-improving epochs
  double weight_decay = 0.01;
  double clip_norm = 5.0; // <= 0 disables gradient clipping
  std::uint64_t seed = 42;

  void validate() const;
};

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  MetricsReport val;
  double lr = 0.0; // at the last step of the epoch
  std::map<std::string, double> val_per_dataset_f1;
};

struct TrainResult {
  std::vector<EpochStats> history;
  std::size_t best_epoch = 0;
  double best_macro_f1 = 0.0;
  Checkpoint best;
};

// Runs the full loop: weighted batches with replacement, warmup+linear-decay
// schedule, AdamW, per-epoch validation, best-checkpoint tracking and early
// stopping. Single-threaded and fully deterministic given the seed.
// model.d_ssl/d_wav are overwritten from the corpus dimensions.
TrainResult train_model(const Corpus& corpus, ModelConfig model, const TrainConfig& train,
                        const ContrastiveConfig& loss_cfg, const Ablation& ab,
                        const WaveletConfig& wavelet, const FrameConfig& frame,
                        std::ostream* log = nullptr);

// One line per epoch: epoch, mean train loss, validation accuracy, macro-F1,
// sensitivity, specificity, lr; tab-separated, fixed formatting.
void write_history(const std::filesystem::path& path, const std::vector<EpochStats>& history);

} // namespace bdhpd

#endif
