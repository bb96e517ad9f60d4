#ifndef BDHPD_METRICS_HPP
#define BDHPD_METRICS_HPP

#include <string>
#include <vector>

namespace bdhpd {

// PD is the positive class.
struct ConfusionMatrix {
  long tp = 0, fn = 0, tn = 0, fp = 0;

  long total() const { return tp + fn + tn + fp; }
  ConfusionMatrix& operator+=(const ConfusionMatrix& o) {
    tp += o.tp;
    fn += o.fn;
    tn += o.tn;
    fp += o.fp;
    return *this;
  }
};

// Predict PD iff p >= threshold (ties go positive).
ConfusionMatrix confusion(const std::vector<double>& probs,
                          const std::vector<int>& labels, double threshold = 0.5);

// All values are percentages. macro_f1 is the unweighted mean of the two
// per-class F1 scores; f1_positive is the PD-class F1 alone. Empty
// denominators yield 0 and set the degenerate flag.
struct MetricsReport {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double f1_positive = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  bool degenerate = false;
};

MetricsReport metrics(const ConfusionMatrix& cm);

// Fixed 2-decimal rendering used in reports ("83.59").
std::string render_pct(double v);

} // namespace bdhpd

#endif
