#ifndef BDHPD_LOSSES_HPP
#define BDHPD_LOSSES_HPP

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "bdhpd/manifest.hpp"
#include "bdhpd/model.hpp"
#include "bdhpd/tape.hpp"

namespace bdhpd {

struct ContrastiveConfig {
  double m_pos = 0.2;
  double m_neg = 1.0;
  double lambda = 1.0;
  bool hinge = true; // clamp both terms at 0; the literal unclamped form is
                     // unbounded below in the negative distance

  void validate() const {
    if (!(m_pos >= 0.0) || !(m_pos < m_neg))
      throw ConfigError("loss: need 0 <= m_pos < m_neg, got m_pos=" + std::to_string(m_pos) +
                        " m_neg=" + std::to_string(m_neg));
    if (lambda < 0.0) throw ConfigError("loss.lambda: must be >= 0");
  }
};

struct PairIndices {
  std::optional<std::pair<std::size_t, std::size_t>> hardest_positive;
  std::optional<std::pair<std::size_t, std::size_t>> hardest_negative;
};

template <typename T>
double euclidean_distance(const Tensor<T>& a, const Tensor<T>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

// Hardest positive = most distant same-label pair; hardest negative =
// closest different-label pair. One pair of each kind per call. Ties break
// toward the smallest (i, then j) with i < j. A missing pair type leaves the
// corresponding member empty (term absent, not an error).
template <typename T>
PairIndices mine_hard_pairs(const std::vector<Tensor<T>>& embeddings,
                            const std::vector<int>& labels) {
  if (embeddings.size() != labels.size())
    throw UsageError("mine_hard_pairs: embeddings/labels length mismatch");
  PairIndices out;
  double best_pos = -1.0, best_neg = 0.0;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
      const double d = euclidean_distance(embeddings[i], embeddings[j]);
      if (labels[i] == labels[j]) {
        if (!out.hardest_positive || d > best_pos) {
          out.hardest_positive = {i, j};
          best_pos = d;
        }
      } else {
        if (!out.hardest_negative || d < best_neg) {
          out.hardest_negative = {i, j};
          best_neg = d;
        }
      }
    }
  }
  return out;
}

// Scalar BCE node over a batch: mean of per-sample bce terms.
template <typename T>
Var mean_bce(Tape<T>& tape, const std::vector<Var>& probs, const std::vector<int>& labels) {
  if (probs.empty() || probs.size() != labels.size())
    throw UsageError("mean_bce: need matching nonempty probs/labels");
  std::vector<Var> terms;
  terms.reserve(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    terms.push_back(tape.bce(probs[i], static_cast<T>(labels[i])));
  const std::vector<T> coeffs(terms.size(), T(1) / static_cast<T>(terms.size()));
  return tape.linear_comb(terms, coeffs);
}

// Margin contrastive loss over the mined pairs (on-tape; gradients flow into
// the two selected pairs only). Returns nothing when neither term exists.
template <typename T>
std::optional<Var> contrastive_loss(Tape<T>& tape, const std::vector<Var>& embeddings,
                                    const std::vector<int>& labels,
                                    const ContrastiveConfig& cfg) {
  cfg.validate();
  std::vector<Tensor<T>> values;
  values.reserve(embeddings.size());
  for (Var v : embeddings) values.push_back(tape.value(v));
  const PairIndices pairs = mine_hard_pairs(values, labels);

  std::vector<Var> terms;
  std::vector<T> coeffs;
  if (pairs.hardest_positive) {
    const auto [i, j] = *pairs.hardest_positive;
    Var d = tape.sqrt_scalar(tape.sum_squares(tape.sub(embeddings[i], embeddings[j])));
    Var t = tape.add_const(d, static_cast<T>(-cfg.m_pos));
    if (cfg.hinge) t = tape.relu(t);
    terms.push_back(t);
    coeffs.push_back(T(1));
  }
  if (pairs.hardest_negative) {
    const auto [i, j] = *pairs.hardest_negative;
    Var d = tape.sqrt_scalar(tape.sum_squares(tape.sub(embeddings[i], embeddings[j])));
    Var t = tape.scale(tape.add_const(d, static_cast<T>(-cfg.m_neg)), T(-1));
    if (cfg.hinge) t = tape.relu(t);
    terms.push_back(t);
    coeffs.push_back(T(1));
  }
  if (terms.empty()) return std::nullopt;
  return tape.linear_comb(terms, coeffs);
}

// Training objective: mean BCE over every routed sample, plus lambda times
// one contrastive term per head over the samples that head processed.
template <typename T>
Var total_loss(Tape<T>& tape, const std::vector<Var>& probs,
               const std::vector<Var>& embeddings, const std::vector<int>& labels,
               const std::vector<TaskType>& tasks, const Ablation& ab,
               const ContrastiveConfig& cfg) {
  if (probs.size() != labels.size() || probs.size() != tasks.size() ||
      probs.size() != embeddings.size())
    throw UsageError("total_loss: batch vectors must have equal lengths");
  std::vector<Var> terms{mean_bce(tape, probs, labels)};
  std::vector<T> coeffs{T(1)};
  if (!ab.contrastive && cfg.lambda > 0.0) {
    std::vector<std::string> heads;
    for (TaskType t : tasks) {
      const std::string h = head_prefix(t, ab);
      if (std::find(heads.begin(), heads.end(), h) == heads.end()) heads.push_back(h);
    }
    std::sort(heads.begin(), heads.end());
    for (const std::string& h : heads) {
      std::vector<Var> sub_emb;
      std::vector<int> sub_labels;
      for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (head_prefix(tasks[i], ab) != h) continue;
        sub_emb.push_back(embeddings[i]);
        sub_labels.push_back(labels[i]);
      }
      if (auto term = contrastive_loss(tape, sub_emb, sub_labels, cfg)) {
        terms.push_back(*term);
        coeffs.push_back(static_cast<T>(cfg.lambda));
      }
    }
  }
  return tape.linear_comb(terms, coeffs);
}

} // namespace bdhpd

#endif
