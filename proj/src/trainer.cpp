#include "bdhpd/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "bdhpd/sampler.hpp"

namespace bdhpd {

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train.epochs: must be positive");
  if (batch_size == 0) throw ConfigError("train.batch: must be positive");
  if (!(max_lr > 0.0)) throw ConfigError("train.max_lr: must be positive");
  if (!(warmup_ratio > 0.0) || !(warmup_ratio < 1.0))
    throw ConfigError("train.warmup_ratio: need 0 < ratio < 1");
  if (patience == 0) throw ConfigError("train.patience: must be positive");
  if (weight_decay < 0.0) throw ConfigError("train.weight_decay: must be >= 0");
}

TrainResult train_model(const Corpus& corpus, ModelConfig model, const TrainConfig& train,
                        const ContrastiveConfig& loss_cfg, const Ablation& ab,
                        const WaveletConfig& wavelet, const FrameConfig& frame,
                        std::ostream* log) {
  train.validate();
  loss_cfg.validate();
  if (corpus.train.empty()) throw InputError("train: empty training split");
  if (corpus.val.empty()) throw InputError("train: empty validation split");

  model.d_ssl = corpus.d_ssl;
  model.d_wav = ab.wavelet ? 0 : corpus.d_wav;
  model.validate();

  std::vector<ManifestEntry> train_meta;
  train_meta.reserve(corpus.train.size());
  for (const auto& s : corpus.train) train_meta.push_back(s.meta);
  const WeightedSampler sampler = WeightedSampler::build(train_meta);
  Rng sample_rng(derive_seed(train.seed, 0x534d50ULL /*SMP*/));

  ParamStore<float> params = init_params(model, corpus.languages.size(), ab, train.seed);
  OptimizerState opt = OptimizerState::init(params);
  AdamWConfig adamw;
  adamw.weight_decay = static_cast<float>(train.weight_decay);

  const std::size_t steps_per_epoch =
      (corpus.train.size() + train.batch_size - 1) / train.batch_size;
  ScheduleConfig sched;
  sched.warmup_ratio = train.warmup_ratio;
  sched.total_steps = static_cast<long>(train.epochs * steps_per_epoch);

  TrainResult result;
  long global_step = 0;
  std::size_t stale_epochs = 0;
  double lr = 0.0;

  for (std::size_t epoch = 1; epoch <= train.epochs; ++epoch) {
    double loss_sum = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      ++global_step;
      lr = lr_at(global_step, sched, train.max_lr);

      std::vector<std::size_t> batch(train.batch_size);
      for (std::size_t& b : batch) b = sampler.next(sample_rng);

      Tape<float> tape;
      ModelGraph<float> graph(tape, params, model, ab);
      std::vector<Var> probs, embeddings;
      std::vector<int> labels;
      std::vector<TaskType> tasks;
      probs.reserve(batch.size());
      for (std::size_t idx : batch) {
        const LoadedSample& smp = corpus.train[idx];
        SampleInput<float> in;
        in.ssl = smp.ssl;
        if (!ab.wavelet) in.wav = smp.wav;
        in.lang = smp.lang;
        in.task = smp.meta.task;
        const ForwardResult<float> out = graph.forward(in);
        probs.push_back(out.prob);
        embeddings.push_back(out.embedding);
        labels.push_back(smp.meta.label);
        tasks.push_back(smp.meta.task);
      }
      const Var loss = total_loss(tape, probs, embeddings, labels, tasks, ab, loss_cfg);
      const double loss_value = static_cast<double>(tape.value(loss).data[0]);
      if (!std::isfinite(loss_value))
        throw NumericError("train: non-finite loss at step " + std::to_string(global_step));
      tape.backward(loss);

      const std::vector<Var>& pvars = graph.param_vars();
      for (std::size_t p = 0; p < params.size(); ++p) params[p].grad = tape.grad(pvars[p]);
      clip_global_norm(params, train.clip_norm);
      adamw_step(params, opt, static_cast<float>(lr), adamw);
      loss_sum += loss_value;
    }

    const EvalResult val = evaluate(params, model, ab, corpus.val);
    EpochStats stats;
    stats.epoch = epoch;
    stats.train_loss = loss_sum / static_cast<double>(steps_per_epoch);
    stats.val = val.report;
    stats.lr = lr;
    for (const auto& [ds, m] : val.per_dataset) stats.val_per_dataset_f1[ds] = m.macro_f1;
    result.history.push_back(stats);
    if (log) {
      *log << "epoch " << epoch << "  loss=" << stats.train_loss
           << "  val_macro_f1=" << render_pct(stats.val.macro_f1);
      for (const auto& [ds, f1] : stats.val_per_dataset_f1)
        *log << "  " << ds << "=" << render_pct(f1);
      *log << "\n";
    }

    if (result.history.size() == 1 || stats.val.macro_f1 > result.best_macro_f1) {
      result.best_macro_f1 = stats.val.macro_f1;
      result.best_epoch = epoch;
      result.best.params = params; // snapshot
      stale_epochs = 0;
    } else if (++stale_epochs >= train.patience) {
      break;
    }
  }

  result.best.model = model;
  result.best.wavelet = wavelet;
  result.best.frame = frame;
  result.best.ablation = ab;
  result.best.languages = corpus.languages;
  return result;
}

void write_history(const std::filesystem::path& path, const std::vector<EpochStats>& history) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("history: cannot write " + path.string());
  os << "epoch\ttrain_loss\tval_accuracy\tval_macro_f1\tval_sensitivity\tval_specificity\tlr\n";
  char buf[160];
  for (const EpochStats& e : history) {
    std::snprintf(buf, sizeof(buf), "%zu\t%.6f\t%.2f\t%.2f\t%.2f\t%.2f\t%.6e\n", e.epoch,
                  e.train_loss, e.val.accuracy, e.val.macro_f1, e.val.sensitivity,
                  e.val.specificity, e.lr);
    os << buf;
  }
}

} // namespace bdhpd
