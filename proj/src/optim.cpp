#include "bdhpd/optim.hpp"

#include <cmath>
#include <string>

#include "bdhpd/errors.hpp"

namespace bdhpd {

void ScheduleConfig::validate() const {
  if (!(warmup_ratio > 0.0) || !(warmup_ratio < 1.0))
    throw ConfigError("train.warmup_ratio: need 0 < ratio < 1, got " +
                      std::to_string(warmup_ratio));
  if (total_steps <= 0) throw ConfigError("schedule: total_steps must be positive");
}

long ScheduleConfig::warmup_steps() const {
  return static_cast<long>(std::ceil(warmup_ratio * static_cast<double>(total_steps)));
}

double lr_at(long step, const ScheduleConfig& cfg, double max_lr) {
  cfg.validate();
  if (step < 0 || step > cfg.total_steps)
    throw UsageError("lr_at: step " + std::to_string(step) + " outside [0, " +
                     std::to_string(cfg.total_steps) + "]");
  const long w = cfg.warmup_steps();
  if (step <= w) return max_lr * static_cast<double>(step) / static_cast<double>(w);
  return max_lr * static_cast<double>(cfg.total_steps - step) /
         static_cast<double>(cfg.total_steps - w);
}

OptimizerState OptimizerState::init(const ParamStore<float>& params) {
  OptimizerState st;
  st.m.reserve(params.size());
  st.v.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    st.m.push_back(TensorF::zeros(params[i].value.shape));
    st.v.push_back(TensorF::zeros(params[i].value.shape));
  }
  return st;
}

void adamw_step(ParamStore<float>& params, OptimizerState& state, float lr,
                const AdamWConfig& cfg) {
  if (state.m.size() != params.size())
    throw UsageError("adamw_step: optimizer state does not match parameter store");
  state.step += 1;
  const float bc1 = 1.0f - std::pow(cfg.beta1, static_cast<float>(state.step));
  const float bc2 = 1.0f - std::pow(cfg.beta2, static_cast<float>(state.step));
  for (std::size_t p = 0; p < params.size(); ++p) {
    auto& entry = params[p];
    if (!entry.grad.all_finite())
      throw NumericError("adamw_step: non-finite gradient for parameter '" + entry.name + "'");
    auto& m = state.m[p].data;
    auto& v = state.v[p].data;
    for (std::size_t i = 0; i < entry.value.size(); ++i) {
      const float g = entry.grad.data[i];
      m[i] = cfg.beta1 * m[i] + (1.0f - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0f - cfg.beta2) * g * g;
      const float mhat = m[i] / bc1;
      const float vhat = v[i] / bc2;
      entry.value.data[i] -=
          lr * (mhat / (std::sqrt(vhat) + cfg.eps)) + lr * cfg.weight_decay * entry.value.data[i];
    }
  }
}

double clip_global_norm(ParamStore<float>& params, double max_norm) {
  if (max_norm <= 0.0) return 0.0;
  double sq = 0.0;
  for (std::size_t p = 0; p < params.size(); ++p)
    for (float g : params[p].grad.data) sq += static_cast<double>(g) * static_cast<double>(g);
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const float s = static_cast<float>(max_norm / norm);
    for (std::size_t p = 0; p < params.size(); ++p)
      for (float& g : params[p].grad.data) g *= s;
  }
  return norm;
}

} // namespace bdhpd
