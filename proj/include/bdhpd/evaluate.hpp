#ifndef BDHPD_EVALUATE_HPP
#define BDHPD_EVALUATE_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bdhpd/corpus.hpp"
#include "bdhpd/metrics.hpp"
#include "bdhpd/model.hpp"

namespace bdhpd {

// Forward one utterance without gradients; returns the routed head's
// probability and pooled embedding.
struct SampleOutput {
  double prob = 0.0;
  std::vector<float> embedding;
};

SampleOutput forward_sample(const ParamStore<float>& params, const ModelConfig& cfg,
                            const Ablation& ab, const LoadedSample& s);

struct EvalOptions {
  double threshold = 0.5;
  bool speaker_vote = false; // majority vote per speaker instead of per utterance
};

struct EvalResult {
  ConfusionMatrix overall;
  MetricsReport report;
  std::map<std::string, MetricsReport> per_dataset;
  // (dataset, task) cells; they re-aggregate to the overall matrix
  std::map<std::pair<std::string, std::string>, ConfusionMatrix> cells;
  std::vector<double> probs; // utterance-level, input order
  std::vector<int> labels;
};

EvalResult evaluate(const ParamStore<float>& params, const ModelConfig& cfg,
                    const Ablation& ab, const std::vector<LoadedSample>& samples,
                    const EvalOptions& opt = {});

std::string format_eval_report(const EvalResult& r);

struct EmbeddingRow {
  std::string utterance_id;
  std::string dataset;
  int label = 0;
  TaskType task = TaskType::DDK;
  std::vector<float> embedding;
  double pc1 = 0.0, pc2 = 0.0;
};

// Pooled post-attention embeddings plus their projection onto the top-2
// principal components of the exported set.
std::vector<EmbeddingRow> export_embeddings(const ParamStore<float>& params,
                                            const ModelConfig& cfg, const Ablation& ab,
                                            const std::vector<LoadedSample>& samples,
                                            std::optional<TaskType> task_filter);

void write_embeddings_csv(const std::filesystem::path& path,
                          const std::vector<EmbeddingRow>& rows);

} // namespace bdhpd

#endif
