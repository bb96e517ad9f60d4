#include "bdhpd/wavelet.hpp"

#include <cmath>

namespace bdhpd {

WaveletFamily wavelet_family_from_string(const std::string& s) {
  if (s == "haar") return WaveletFamily::haar;
  if (s == "db4") return WaveletFamily::db4;
  throw ConfigError("wavelet.family: unknown family '" + s + "' (haar, db4)");
}

std::string to_string(WaveletFamily f) {
  return f == WaveletFamily::haar ? "haar" : "db4";
}

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

WaveletFilters make_filters(std::vector<double> dec_lo) {
  WaveletFilters f;
  f.dec_lo = std::move(dec_lo);
  const std::size_t n = f.dec_lo.size();
  f.dec_hi.resize(n);
  for (std::size_t m = 0; m < n; ++m) {
    const double v = f.dec_lo[n - 1 - m];
    f.dec_hi[m] = (m % 2 == 0) ? v : -v;
  }
  return f;
}

} // namespace

const WaveletFilters& wavelet_filters(WaveletFamily f) {
  static const WaveletFilters haar = make_filters({kInvSqrt2, kInvSqrt2});
  // 8-tap Daubechies filter with 4 vanishing moments (analysis low-pass is
  // the reversed scaling filter).
  static const WaveletFilters db4 = make_filters({
      -0.010597401784997278,
      0.032883011666982945,
      0.030841381835986965,
      -0.18703481171888114,
      -0.02798376941698385,
      0.6308807679295904,
      0.7148465705525415,
      0.23037781330885523,
  });
  return f == WaveletFamily::haar ? haar : db4;
}

std::vector<const std::vector<double>*> DwtPyramid::bands() const {
  std::vector<const std::vector<double>*> out;
  out.reserve(details.size() + 1);
  out.push_back(&approx);
  for (std::size_t i = details.size(); i-- > 0;) out.push_back(&details[i]);
  return out;
}

void dwt_step(const std::vector<double>& x, const WaveletFilters& f,
              std::vector<double>& approx, std::vector<double>& detail) {
  const std::size_t n = x.size();
  if (n % 2 != 0)
    throw InputError("dwt_step: signal length must be even, got " + std::to_string(n));
  const std::size_t half = n / 2;
  const std::size_t taps = f.dec_lo.size();
  approx.assign(half, 0.0);
  detail.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    const std::size_t base = 2 * k;
    const double center = x[base];
    double a = 0.0, d = 0.0;
    for (std::size_t m = 0; m < taps; ++m) {
      const double xv = x[(base + m) % n];
      a += f.dec_lo[m] * xv;
      d += f.dec_hi[m] * (xv - center);
    }
    approx[k] = a;
    detail[k] = d;
  }
}

DwtPyramid dwt(const std::vector<double>& frame, const WaveletConfig& cfg) {
  if (cfg.levels < 1)
    throw ConfigError("wavelet.levels: must be >= 1, got " + std::to_string(cfg.levels));
  const std::size_t block = std::size_t(1) << cfg.levels;
  if (frame.size() < block)
    throw ConfigError("dwt: frame of " + std::to_string(frame.size()) +
                      " samples too short for " + std::to_string(cfg.levels) +
                      " levels (needs >= " + std::to_string(block) + ")");
  if (frame.size() % block != 0)
    throw ConfigError("dwt: frame length " + std::to_string(frame.size()) +
                      " is not a multiple of 2^levels = " + std::to_string(block) +
                      "; periodic analysis needs an even length at every level");
  DwtPyramid pyr;
  pyr.original_len = frame.size();
  pyr.padded_len = frame.size();

  std::vector<double> current(frame);
  const WaveletFilters& filters = wavelet_filters(cfg.family);
  pyr.details.reserve(cfg.levels);
  for (std::size_t level = 0; level < cfg.levels; ++level) {
    std::vector<double> approx, detail;
    dwt_step(current, filters, approx, detail);
    pyr.details.push_back(std::move(detail));
    current = std::move(approx);
  }
  pyr.approx = std::move(current);
  return pyr;
}

std::vector<double> wavelet_features(const std::vector<double>& frame,
                                     const WaveletConfig& cfg) {
  const std::size_t block = std::size_t(1) << cfg.levels;
  if (frame.size() < block)
    throw ConfigError("wavelet_features: frame of " + std::to_string(frame.size()) +
                      " samples too short for " + std::to_string(cfg.levels) + " levels");
  std::vector<double> extended;
  const std::vector<double>* input = &frame;
  if (frame.size() % block != 0) {
    // extend periodically to the next multiple of 2^levels; this matches the
    // transform's boundary convention and keeps constant frames constant
    const std::size_t target = ((frame.size() + block - 1) / block) * block;
    extended.reserve(target);
    extended = frame;
    for (std::size_t i = frame.size(); i < target; ++i)
      extended.push_back(frame[i % frame.size()]);
    input = &extended;
  }
  const DwtPyramid pyr = dwt(*input, cfg);
  std::vector<double> out;
  out.reserve(wavelet_feature_dim(cfg));
  for (const std::vector<double>* band : pyr.bands()) {
    double energy = 0.0, abs_sum = 0.0, sum = 0.0;
    for (double c : *band) {
      energy += c * c;
      abs_sum += std::fabs(c);
      sum += c;
    }
    const double n = static_cast<double>(band->size());
    const double mean = sum / n;
    double var = 0.0;
    for (double c : *band) var += (c - mean) * (c - mean);
    var /= n;
    out.push_back(std::log(energy + cfg.eps));
    out.push_back(abs_sum / n);
    out.push_back(std::sqrt(var));
  }
  return out;
}

} // namespace bdhpd
