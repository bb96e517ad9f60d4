#include "bdhpd/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bdhpd/pca.hpp"

namespace bdhpd {

SampleOutput forward_sample(const ParamStore<float>& params, const ModelConfig& cfg,
                            const Ablation& ab, const LoadedSample& s) {
  Tape<float> tape;
  ModelGraph<float> graph(tape, params, cfg, ab);
  SampleInput<float> in;
  in.ssl = s.ssl;
  if (!ab.wavelet) in.wav = s.wav;
  in.lang = s.lang;
  in.task = s.meta.task;
  const ForwardResult<float> out = graph.forward(in);
  SampleOutput so;
  so.prob = static_cast<double>(tape.value(out.prob).data[0]);
  so.embedding = tape.value(out.embedding).data;
  return so;
}

EvalResult evaluate(const ParamStore<float>& params, const ModelConfig& cfg,
                    const Ablation& ab, const std::vector<LoadedSample>& samples,
                    const EvalOptions& opt) {
  if (samples.empty()) throw UsageError("evaluate: empty split");
  EvalResult r;
  r.probs.reserve(samples.size());
  r.labels.reserve(samples.size());
  for (const LoadedSample& s : samples) {
    r.probs.push_back(forward_sample(params, cfg, ab, s).prob);
    r.labels.push_back(s.meta.label);
  }

  std::vector<double> unit_probs;
  std::vector<int> unit_labels;
  std::vector<std::pair<std::string, std::string>> unit_keys; // dataset, task
  if (opt.speaker_vote) {
    // majority vote per (dataset, speaker); ties go positive, matching the
    // utterance-level tie rule
    std::map<std::pair<std::string, std::string>, std::pair<int, int>> votes; // pos, total
    std::map<std::pair<std::string, std::string>, int> speaker_label;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto key = std::make_pair(samples[i].meta.dataset, samples[i].meta.speaker_id);
      votes[key].first += r.probs[i] >= opt.threshold ? 1 : 0;
      votes[key].second += 1;
      speaker_label[key] = samples[i].meta.label;
    }
    for (const auto& [key, v] : votes) {
      unit_probs.push_back(2 * v.first >= v.second ? 1.0 : 0.0);
      unit_labels.push_back(speaker_label[key]);
      unit_keys.emplace_back(key.first, "all");
    }
  } else {
    unit_probs = r.probs;
    unit_labels = r.labels;
    for (const LoadedSample& s : samples)
      unit_keys.emplace_back(s.meta.dataset, to_string(s.meta.task));
  }

  r.overall = confusion(unit_probs, unit_labels, opt.threshold);
  r.report = metrics(r.overall);

  std::map<std::string, ConfusionMatrix> per_ds;
  for (std::size_t i = 0; i < unit_probs.size(); ++i) {
    const bool pred = unit_probs[i] >= opt.threshold;
    ConfusionMatrix one;
    if (unit_labels[i] == 1)
      (pred ? one.tp : one.fn) = 1;
    else
      (pred ? one.fp : one.tn) = 1;
    per_ds[unit_keys[i].first] += one;
    r.cells[unit_keys[i]] += one;
  }
  for (const auto& [ds, cm] : per_ds) r.per_dataset[ds] = metrics(cm);
  return r;
}

std::string format_eval_report(const EvalResult& r) {
  std::ostringstream os;
  auto line = [&](const std::string& name, const MetricsReport& m) {
    os << name << "  acc=" << render_pct(m.accuracy) << "  macro_f1=" << render_pct(m.macro_f1)
       << "  f1_pd=" << render_pct(m.f1_positive) << "  sens=" << render_pct(m.sensitivity)
       << "  spec=" << render_pct(m.specificity) << (m.degenerate ? "  [degenerate]" : "")
       << "\n";
  };
  line("overall", r.report);
  for (const auto& [ds, m] : r.per_dataset) line("  " + ds, m);
  os << "  cells:";
  for (const auto& [key, cm] : r.cells)
    os << "  " << key.first << "/" << key.second << " tp=" << cm.tp << " fn=" << cm.fn
       << " tn=" << cm.tn << " fp=" << cm.fp;
  os << "\n";
  return os.str();
}

std::vector<EmbeddingRow> export_embeddings(const ParamStore<float>& params,
                                            const ModelConfig& cfg, const Ablation& ab,
                                            const std::vector<LoadedSample>& samples,
                                            std::optional<TaskType> task_filter) {
  std::vector<EmbeddingRow> rows;
  for (const LoadedSample& s : samples) {
    if (task_filter && s.meta.task != *task_filter) continue;
    EmbeddingRow row;
    row.utterance_id = s.meta.utterance_id;
    row.dataset = s.meta.dataset;
    row.label = s.meta.label;
    row.task = s.meta.task;
    row.embedding = forward_sample(params, cfg, ab, s).embedding;
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw UsageError("export_embeddings: empty selection");

  std::vector<std::vector<double>> pts;
  pts.reserve(rows.size());
  for (const EmbeddingRow& r : rows)
    pts.emplace_back(r.embedding.begin(), r.embedding.end());
  const Pca2 pca = pca_top2(pts);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto p = pca.project(pts[i]);
    rows[i].pc1 = p[0];
    rows[i].pc2 = p[1];
  }
  return rows;
}

void write_embeddings_csv(const std::filesystem::path& path,
                          const std::vector<EmbeddingRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("export_embeddings: cannot write " + path.string());
  const std::size_t d = rows.front().embedding.size();
  os << "utterance_id,dataset,label,task";
  for (std::size_t j = 0; j < d; ++j) os << ",e" << j;
  os << ",pc1,pc2\n";
  char buf[32];
  for (const EmbeddingRow& r : rows) {
    os << r.utterance_id << "," << r.dataset << "," << r.label << "," << to_string(r.task);
    for (float v : r.embedding) {
      std::snprintf(buf, sizeof(buf), "%.7g", static_cast<double>(v));
      os << "," << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.7g", r.pc1);
    os << "," << buf;
    std::snprintf(buf, sizeof(buf), "%.7g", r.pc2);
    os << "," << buf << "\n";
  }
}

} // namespace bdhpd
