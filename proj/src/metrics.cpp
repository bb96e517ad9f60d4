#include "bdhpd/metrics.hpp"

#include <cstdio>

#include "bdhpd/errors.hpp"

namespace bdhpd {

ConfusionMatrix confusion(const std::vector<double>& probs,
                          const std::vector<int>& labels, double threshold) {
  if (probs.empty()) throw UsageError("confusion: empty input");
  if (probs.size() != labels.size())
    throw UsageError("confusion: probs/labels length mismatch");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool pred_pd = probs[i] >= threshold;
    if (labels[i] == 1)
      (pred_pd ? cm.tp : cm.fn) += 1;
    else
      (pred_pd ? cm.fp : cm.tn) += 1;
  }
  return cm;
}

namespace {

// ratio with 0/0 -> 0, flagged
double safe_div(long num, long den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

MetricsReport metrics(const ConfusionMatrix& cm) {
  if (cm.total() < 1) throw UsageError("metrics: confusion matrix is empty");
  MetricsReport r;
  r.accuracy = 100.0 * static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
  r.sensitivity = 100.0 * safe_div(cm.tp, cm.tp + cm.fn, r.degenerate);
  r.specificity = 100.0 * safe_div(cm.tn, cm.tn + cm.fp, r.degenerate);
  // per-class F1 = 2*TP / (2*TP + FP + FN), with the class roles swapped for
  // the negative class
  const double f1_pos = safe_div(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn, r.degenerate);
  const double f1_neg = safe_div(2 * cm.tn, 2 * cm.tn + cm.fn + cm.fp, r.degenerate);
  r.f1_positive = 100.0 * f1_pos;
  r.macro_f1 = 100.0 * 0.5 * (f1_pos + f1_neg);
  return r;
}

std::string render_pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

} // namespace bdhpd
