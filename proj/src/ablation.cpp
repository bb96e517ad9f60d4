#include "bdhpd/ablation.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace bdhpd {

std::vector<AblationRow> run_ablation(const Corpus& corpus, const ModelConfig& model,
                                      const TrainConfig& train,
                                      const ContrastiveConfig& loss_cfg,
                                      const WaveletConfig& wavelet, const FrameConfig& frame,
                                      const std::vector<std::string>& components,
                                      std::ostream* log) {
  // validate names up front so a typo fails before hours of training
  (void)Ablation::from_components(components);

  std::vector<AblationRow> rows;
  std::vector<std::string> runs{"full"};
  runs.insert(runs.end(), components.begin(), components.end());

  for (const std::string& run : runs) {
    Ablation ab;
    if (run != "full") ab = Ablation::from_components({run});
    if (log) *log << "[ablate] training with removed=" << run << "\n";
    const TrainResult res =
        train_model(corpus, model, train, loss_cfg, ab, wavelet, frame, log);
    const EvalResult ev =
        evaluate(res.best.params, res.best.model, res.best.ablation, corpus.test);
    AblationRow row;
    row.removed = run;
    row.pooled_macro_f1 = ev.report.macro_f1;
    for (const auto& [ds, m] : ev.per_dataset) row.macro_f1[ds] = m.macro_f1;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream os;
  os << "removed";
  for (const auto& [ds, _] : rows.front().macro_f1) os << "\t" << ds << "\tdelta";
  os << "\tpooled\n";
  for (const AblationRow& r : rows) {
    os << r.removed;
    for (const auto& [ds, f1] : r.macro_f1) {
      const double delta = f1 - rows.front().macro_f1.at(ds);
      os << "\t" << render_pct(f1) << "\t" << render_pct(delta);
    }
    os << "\t" << render_pct(r.pooled_macro_f1) << "\n";
  }
  return os.str();
}

void write_ablation_tsv(const std::filesystem::path& path,
                        const std::vector<AblationRow>& rows) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw InputError("ablation: cannot write " + path.string());
  os << "removed\tdataset\tmacro_f1\tdelta_vs_full\n";
  for (const AblationRow& r : rows)
    for (const auto& [ds, f1] : r.macro_f1)
      os << r.removed << "\t" << ds << "\t" << render_pct(f1) << "\t"
         << render_pct(f1 - rows.front().macro_f1.at(ds)) << "\n";
}

} // namespace bdhpd
