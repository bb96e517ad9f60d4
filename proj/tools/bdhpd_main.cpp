#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bdhpd/ablation.hpp"
#include "bdhpd/config.hpp"
#include "bdhpd/gradcheck_suite.hpp"
#include "bdhpd/synth.hpp"

namespace fs = std::filesystem;
using namespace bdhpd;

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args, const std::string& default_out) {
  cmd->add_option("--config", args.config_path, "flat JSON config file");
  cmd->add_option("--seed", args.seed, "seed override (train.seed and synth.seed)");
  cmd->add_option("--out", args.out_dir, "output directory")->default_val(default_out);
  cmd->add_option("overrides", args.overrides, "dotted-key overrides, e.g. model.ratio=8");
}

RunSettings settings_from(const CommonArgs& args) {
  std::optional<fs::path> cfg;
  if (!args.config_path.empty()) cfg = args.config_path;
  RunSettings s = load_settings(cfg, args.overrides);
  if (args.seed) {
    s.train.seed = *args.seed;
    s.synth.seed = *args.seed;
  }
  s.synth.frame = s.frame;
  return s;
}

Corpus load_for(const RunSettings& s, bool with_wavelet) {
  if (s.data_dir.empty())
    throw ConfigError("data.dir: required (corpus directory; generate one with 'synth')");
  return load_corpus(s.data_dir, s.frame, s.wavelet, with_wavelet);
}

std::map<std::string, std::string> parse_lang_map(const std::vector<std::string>& entries) {
  std::map<std::string, std::string> map;
  for (const std::string& kv : entries) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == kv.size())
      throw UsageError("--lang-map expects old=new, got '" + kv + "'");
    map[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return map;
}

void write_metrics_file(const fs::path& path, const EvalResult& r) {
  std::ofstream os(path, std::ios::trunc);
  auto emit = [&](const std::string& prefix, const MetricsReport& m) {
    os << prefix << ".accuracy\t" << render_pct(m.accuracy) << "\n";
    os << prefix << ".macro_f1\t" << render_pct(m.macro_f1) << "\n";
    os << prefix << ".f1_positive\t" << render_pct(m.f1_positive) << "\n";
    os << prefix << ".sensitivity\t" << render_pct(m.sensitivity) << "\n";
    os << prefix << ".specificity\t" << render_pct(m.specificity) << "\n";
  };
  emit("overall", r.report);
  for (const auto& [ds, m] : r.per_dataset) emit(ds, m);
  for (const auto& [key, cm] : r.cells)
    os << key.first << "." << key.second << ".confusion\t" << cm.tp << "," << cm.fn << ","
       << cm.tn << "," << cm.fp << "\n";
}

const std::vector<LoadedSample>& pick_split(const Corpus& c, const std::string& split) {
  if (split == "train") return c.train;
  if (split == "val") return c.val;
  if (split == "test") return c.test;
  throw ConfigError("eval.split: expected train|val|test, got '" + split + "'");
}

int cmd_synth(const CommonArgs& args) {
  RunSettings s = settings_from(args);
  const fs::path out = args.out_dir;
  const SynthSummary sum = generate_synthetic_corpus(s.synth, out);
  write_resolved_config(out / "resolved_config.json", s);
  std::cout << "corpus written to " << out.string() << " (train=" << sum.train_utterances
            << " val=" << sum.val_utterances << " test=" << sum.test_utterances << ")\n";
  return 0;
}

int cmd_train(const CommonArgs& args) {
  RunSettings s = settings_from(args);
  const Ablation ab = Ablation::from_components(s.ablate_components());
  const Corpus corpus = load_for(s, !ab.wavelet);
  const fs::path out = args.out_dir;
  fs::create_directories(out);
  write_resolved_config(out / "resolved_config.json", s);

  TrainResult res =
      train_model(corpus, s.model, s.train, s.loss, ab, s.wavelet, s.frame, &std::cout);
  save_checkpoint(out / "checkpoint.bin", res.best);
  write_history(out / "history.tsv", res.history);
  std::cout << "best epoch " << res.best_epoch << " with validation macro-F1 "
            << render_pct(res.best_macro_f1) << "\n"
            << "checkpoint: " << (out / "checkpoint.bin").string() << "\n";
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::vector<std::string>& lang_map_args) {
  RunSettings s = settings_from(args);
  if (s.eval_checkpoint.empty())
    throw ConfigError("eval.checkpoint: required (path to a trained checkpoint)");
  const Checkpoint ck = load_checkpoint(s.eval_checkpoint);
  if (s.data_dir.empty()) throw ConfigError("data.dir: required");
  const auto lang_map = parse_lang_map(lang_map_args);
  const std::vector<LoadedSample> samples =
      load_split(fs::path(s.data_dir) / ("manifest_" + s.eval_split + ".jsonl"), ck.frame,
                 ck.wavelet, !ck.ablation.wavelet, ck.languages, lang_map);
  if (samples.empty()) throw InputError("eval: split '" + s.eval_split + "' is empty");

  EvalOptions opt;
  opt.threshold = s.eval_threshold;
  opt.speaker_vote = s.eval_speaker_vote;
  const EvalResult r = evaluate(ck.params, ck.model, ck.ablation, samples, opt);
  std::cout << format_eval_report(r);
  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    write_metrics_file(fs::path(args.out_dir) / "metrics.tsv", r);
    write_resolved_config(fs::path(args.out_dir) / "resolved_config.json", s);
  }
  return 0;
}

int cmd_ablate(const CommonArgs& args, std::string components_csv) {
  RunSettings s = settings_from(args);
  std::vector<std::string> components;
  if (components_csv == "all") {
    components = Ablation::all_component_names();
  } else {
    std::stringstream ss(components_csv);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) components.push_back(item);
  }
  const Corpus corpus = load_for(s, /*with_wavelet=*/true);
  const fs::path out = args.out_dir;
  fs::create_directories(out);
  write_resolved_config(out / "resolved_config.json", s);
  const auto rows = run_ablation(corpus, s.model, s.train, s.loss, s.wavelet, s.frame,
                                 components, &std::cout);
  std::cout << format_ablation_table(rows);
  write_ablation_tsv(out / "ablation.tsv", rows);
  return 0;
}

int cmd_export(const CommonArgs& args) {
  RunSettings s = settings_from(args);
  if (s.eval_checkpoint.empty()) throw ConfigError("eval.checkpoint: required");
  const Checkpoint ck = load_checkpoint(s.eval_checkpoint);
  if (s.data_dir.empty()) throw ConfigError("data.dir: required");
  const std::vector<LoadedSample> samples =
      load_split(fs::path(s.data_dir) / ("manifest_" + s.eval_split + ".jsonl"), ck.frame,
                 ck.wavelet, !ck.ablation.wavelet, ck.languages);
  std::optional<TaskType> filter;
  if (s.export_task != "all") filter = task_from_string(s.export_task);
  const auto rows = export_embeddings(ck.params, ck.model, ck.ablation, samples, filter);
  fs::create_directories(args.out_dir);
  const fs::path csv = fs::path(args.out_dir) / "embeddings.csv";
  write_embeddings_csv(csv, rows);
  write_resolved_config(fs::path(args.out_dir) / "resolved_config.json", s);
  std::cout << rows.size() << " embeddings written to " << csv.string() << "\n";
  return 0;
}

int cmd_gradcheck(const CommonArgs& args) {
  RunSettings s = settings_from(args);
  const auto report = run_gradcheck_suite(s.gradcheck_seeds);
  bool ok = true;
  for (const LayerGradReport& r : report) {
    const bool pass = r.max_rel_err < 1e-4;
    ok = ok && pass;
    std::printf("%-18s max_rel_err=%.3e  %s\n", r.layer.c_str(), r.max_rel_err,
                pass ? "ok" : "FAIL");
  }
  if (!ok) throw NumericError("gradcheck: at least one layer exceeds 1e-4");
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"bilingual dual-head PD-from-speech model: corpus, training, evaluation"};
  app.require_subcommand(1);

  CommonArgs synth_args, train_args, eval_args, ablate_args, export_args, grad_args;
  std::vector<std::string> lang_map_args;
  std::string components_csv = "all";

  CLI::App* synth = app.add_subcommand("synth", "generate the synthetic bilingual corpus");
  add_common(synth, synth_args, "corpus");

  CLI::App* train = app.add_subcommand("train", "train a model on a corpus directory");
  add_common(train, train_args, "run");
  train->add_option("--data", [&train_args](const std::vector<std::string>& v) {
    train_args.overrides.push_back("data.dir=" + v.back());
    return true;
  }, "corpus directory (same as data.dir=...)");

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint on a manifest split");
  add_common(eval, eval_args, "");
  eval->add_option("--checkpoint", [&eval_args](const std::vector<std::string>& v) {
    eval_args.overrides.push_back("eval.checkpoint=" + v.back());
    return true;
  }, "checkpoint path (same as eval.checkpoint=...)");
  eval->add_option("--data", [&eval_args](const std::vector<std::string>& v) {
    eval_args.overrides.push_back("data.dir=" + v.back());
    return true;
  }, "corpus directory");
  eval->add_option("--split", [&eval_args](const std::vector<std::string>& v) {
    eval_args.overrides.push_back("eval.split=" + v.back());
    return true;
  }, "train|val|test");
  eval->add_option("--lang-map", lang_map_args,
                   "map an unseen dataset onto a trained language, old=new (repeatable)");

  CLI::App* ablate = app.add_subcommand("ablate", "component-removal study");
  add_common(ablate, ablate_args, "ablation");
  ablate->add_option("--components", components_csv,
                     "comma list of components to remove, or 'all'");
  ablate->add_option("--data", [&ablate_args](const std::vector<std::string>& v) {
    ablate_args.overrides.push_back("data.dir=" + v.back());
    return true;
  }, "corpus directory");

  CLI::App* exp = app.add_subcommand("export-embeddings",
                                     "pooled embeddings with a 2-D PCA projection");
  add_common(exp, export_args, "embeddings");
  exp->add_option("--checkpoint", [&export_args](const std::vector<std::string>& v) {
    export_args.overrides.push_back("eval.checkpoint=" + v.back());
    return true;
  }, "checkpoint path");
  exp->add_option("--data", [&export_args](const std::vector<std::string>& v) {
    export_args.overrides.push_back("data.dir=" + v.back());
    return true;
  }, "corpus directory");
  exp->add_option("--split", [&export_args](const std::vector<std::string>& v) {
    export_args.overrides.push_back("eval.split=" + v.back());
    return true;
  }, "train|val|test");
  exp->add_option("--task", [&export_args](const std::vector<std::string>& v) {
    export_args.overrides.push_back("export.task=" + v.back());
    return true;
  }, "ddk|continuous|all");

  CLI::App* grad = app.add_subcommand("gradcheck", "finite-difference gradient validation");
  add_common(grad, grad_args, "");
  grad->add_option("--seeds", [&grad_args](const std::vector<std::string>& v) {
    grad_args.overrides.push_back("gradcheck.seeds=" + v.back());
    return true;
  }, "random instances per layer");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_args);
    if (train->parsed()) return cmd_train(train_args);
    if (eval->parsed()) return cmd_eval(eval_args, lang_map_args);
    if (ablate->parsed()) return cmd_ablate(ablate_args, components_csv);
    if (exp->parsed()) return cmd_export(export_args);
    if (grad->parsed()) return cmd_gradcheck(grad_args);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
