#ifndef BDHPD_OPTIM_HPP
#define BDHPD_OPTIM_HPP

#include <cstdint>
#include <vector>

#include "bdhpd/params.hpp"

namespace bdhpd {

// Linear warmup to max_lr over ceil(warmup_ratio * total_steps) steps, then
// linear decay to 0 at total_steps.
struct ScheduleConfig {
  double warmup_ratio = 0.1;
  long total_steps = 0;

  void validate() const;
  long warmup_steps() const;
};

double lr_at(long step, const ScheduleConfig& cfg, double max_lr);

struct AdamWConfig {
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
  float weight_decay = 0.01f;
};

// Per-parameter moments, aligned with ParamStore order.
struct OptimizerState {
  std::vector<TensorF> m;
  std::vector<TensorF> v;
  long step = 0;

  static OptimizerState init(const ParamStore<float>& params);
};

// Bias-corrected adaptive update with decoupled weight decay:
// theta -= lr * mhat/(sqrt(vhat)+eps) + lr * wd * theta.
// Aborts with the parameter identifier on a non-finite gradient.
void adamw_step(ParamStore<float>& params, OptimizerState& state, float lr,
                const AdamWConfig& cfg);

// Scales all gradients by max_norm/||g|| when the global norm exceeds
// max_norm. No-op when max_norm <= 0.
double clip_global_norm(ParamStore<float>& params, double max_norm);

} // namespace bdhpd

#endif
