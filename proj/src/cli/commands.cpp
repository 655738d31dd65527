#include "acorn/cli/commands.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "acorn/cli/config.hpp"
#include "acorn/cli/report.hpp"
#include "acorn/cli/task_io.hpp"
#include "acorn/csv.hpp"
#include "acorn/errors.hpp"
#include "acorn/ingest.hpp"
#include "acorn/pipeline.hpp"
#include "acorn/task_stream.hpp"

namespace acorn::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::string> baseline;
  std::vector<std::string> ablate;
  std::optional<std::string> fit_scope;
  bool force = false;
  bool show_config = false;
  bool dump_scores = false;
  bool no_baseline_memory = false;
};

CliConfig resolve(const Flags& f) {
  CliConfig c = f.config.empty() ? CliConfig{} : load_cli_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.baseline) c.run.baseline = baseline_mode_from_string(*f.baseline);
  for (const auto& a : f.ablate) c.run.ablations.enable(a);
  if (f.fit_scope) c.data.fit_scope = fit_scope_from_string(*f.fit_scope);
  if (f.dump_scores) c.dump_scores = true;
  if (f.no_baseline_memory) c.run.baseline_memory = false;
  c.propagate_seed();
  c.run.validate();
  return c;
}

void prepare_out(const fs::path& out, bool force) {
  if (out.empty()) throw ConfigError("--out DIR is required");
  if (fs::exists(out)) {
    if (!fs::is_directory(out)) throw ConfigError(out.string() + " exists and is not a directory");
    if (!fs::is_empty(out) && !force) {
      throw ConfigError(out.string() + " already exists and is not empty; pass --force to overwrite");
    }
  }
  fs::create_directories(out);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

void write_json(const fs::path& path, const ordered_json& j) { write_text(path, j.dump(2) + "\n"); }

int cmd_synth(const Flags& f) {
  const CliConfig c = resolve(f);
  c.synthetic.validate();
  prepare_out(f.out, f.force);
  const LabeledDataset data = generate_synthetic(c.synthetic);

  std::ofstream out(fs::path(f.out) / "dataset.csv", std::ios::binary);
  if (!out) throw DataError("cannot write " + (fs::path(f.out) / "dataset.csv").string());
  for (const auto& name : data.feature_names) out << name << ',';
  out << "label,attack_class\n";
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (Eigen::Index j = 0; j < data.x.cols(); ++j) out << csv::format(data.x(static_cast<Eigen::Index>(i), j)) << ',';
    out << data.y[i] << ',' << data.classes[i] << '\n';
    ++counts[data.y[i] ? data.classes[i] : std::string("normal")];
  }
  if (!out) throw DataError("write failed: " + (fs::path(f.out) / "dataset.csv").string());

  ordered_json manifest;
  manifest["seed"] = c.seed;
  manifest["synthetic"] = to_json(c.synthetic);
  manifest["rows"] = data.size();
  manifest["features"] = data.dim();
  manifest["class_counts"] = counts;
  write_json(fs::path(f.out) / "dataset.json", manifest);
  std::cout << "wrote " << data.size() << " rows to " << (fs::path(f.out) / "dataset.csv").string() << '\n';
  return 0;
}

int cmd_prepare(const Flags& f, const std::string& dataset_arg) {
  const CliConfig c = resolve(f);
  const std::string dataset = dataset_arg.empty() ? c.data.path : dataset_arg;
  if (dataset.empty()) throw ConfigError("prepare needs a dataset path (argument or data.path)");
  prepare_out(f.out, f.force);
  const RawDataset raw = load_csv(dataset, c.data.schema);
  const PreparedScenario prepared =
      prepare_scenario(raw, c.run.scenario, c.data.fit_scope, c.run.pseudo_labeler.kmeans);

  for (const auto& entry : fs::directory_iterator(f.out)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("task_", 0) == 0) {
      fs::remove_all(entry.path());
    }
  }
  write_tasks(f.out, prepared.tasks, prepared.feature_names);
  ordered_json manifest = scenario_manifest(c.run.scenario, prepared.tasks);
  manifest["fit_scope"] = to_string(c.data.fit_scope);
  manifest["dataset"] = fs::path(dataset).filename().string();
  manifest["features"] = prepared.feature_names.size();
  write_json(fs::path(f.out) / "scenario.json", manifest);
  write_json(fs::path(f.out) / "preprocessor.json", prepared.preprocessor.to_json());
  std::cout << "prepared " << prepared.tasks.size() << " tasks in " << f.out << '\n';
  return 0;
}

void write_scores(const fs::path& dir, const ScenarioResult& result, const std::vector<TaskBundle>& tasks) {
  fs::create_directories(dir);
  for (const auto& report : result.tasks) {
    for (std::size_t j = 0; j < report.evaluations.size(); ++j) {
      const auto& ev = report.evaluations[j];
      std::ofstream out(dir / (task_dir_name(report.task) + "_on_" + task_dir_name(j) + ".csv"), std::ios::binary);
      if (!out) throw DataError("cannot write score files under " + dir.string());
      out << "row,score,prediction,label\n";
      for (Eigen::Index r = 0; r < ev.scores.size(); ++r) {
        out << r << ',' << csv::format(ev.scores(r)) << ',' << ev.predictions[static_cast<std::size_t>(r)] << ','
            << tasks[j].y_test[static_cast<std::size_t>(r)] << '\n';
      }
    }
  }
}

int cmd_run(const Flags& f, const std::string& tasks_dir) {
  CliConfig c = resolve(f);
  prepare_out(f.out, f.force);

  std::vector<TaskBundle> tasks;
  ordered_json source;
  if (!tasks_dir.empty()) {
    LoadedTasks loaded = load_tasks(tasks_dir);
    tasks = std::move(loaded.tasks);
    c.run.scenario.num_tasks = tasks.size();
    if (loaded.scenario.contains("mode")) {
      c.run.scenario.mode = scenario_mode_from_string(loaded.scenario["mode"].get<std::string>());
    }
    source["kind"] = "tasks";
    source["tasks_dir"] = fs::path(tasks_dir).lexically_normal().filename().string();
    source["scenario"] = loaded.scenario;
  } else {
    if (c.synthetic.num_tasks != c.run.scenario.num_tasks) {
      throw ConfigError("synthetic.num_tasks and scenario.num_tasks differ (" + std::to_string(c.synthetic.num_tasks) +
                        " vs " + std::to_string(c.run.scenario.num_tasks) + ")");
    }
    const LabeledDataset data = generate_synthetic(c.synthetic);
    tasks = build_scenario(data, c.run.scenario, c.run.pseudo_labeler.kmeans);
    source["kind"] = "synthetic";
    source["scenario"] = scenario_manifest(c.run.scenario, tasks);
  }

  const auto start = std::chrono::steady_clock::now();
  const ScenarioResult result = run_scenario(c.run, tasks);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const fs::path out(f.out);
  ordered_json manifest;
  manifest["resolved_config"] = to_json(c);
  manifest["source"] = source;
  const ordered_json run_part = run_manifest(c.run, result);
  for (const auto& [key, value] : run_part.items()) manifest[key] = value;
  write_json(out / "manifest.json", manifest);
  write_score_matrix(out / "R.csv", result.f1);
  write_score_matrix(out / "prauc.csv", result.pr_auc);

  std::string metrics = "metric,value\n";
  metrics += "avg_f1," + csv::format(result.avg()) + "\n";
  metrics += "fwd_transfer," + csv::format(result.fwd()) + "\n";
  metrics += "bwd_transfer," + csv::format(result.bwd()) + "\n";
  write_text(out / "metrics.csv", metrics);

  std::string losses = "task,step,metric,recon,total\n";
  for (const auto& t : result.tasks) {
    for (const auto& l : t.loss_trace) {
      losses += std::to_string(t.task) + "," + std::to_string(l.step) + "," + csv::format(l.metric) + "," +
                csv::format(l.recon) + "," + csv::format(l.total) + "\n";
    }
  }
  write_text(out / "losses.csv", losses);

  ordered_json timing;
  timing["wall_seconds"] = wall;
  timing["mean_inference_seconds_per_sample"] = result.mean_inference_seconds_per_sample();
  ordered_json per_task = ordered_json::array();
  for (const auto& t : result.tasks) {
    per_task.push_back({{"task", t.task}, {"inference_seconds", t.inference_seconds},
                        {"inference_samples", t.inference_samples}});
  }
  timing["tasks"] = std::move(per_task);
  write_json(out / "timing.json", timing);

  if (fs::exists(out / "scores")) fs::remove_all(out / "scores");
  if (c.dump_scores) write_scores(out / "scores", result, tasks);

  std::cout << "avg_f1 " << csv::format(result.avg()) << "  fwd_transfer " << csv::format(result.fwd())
            << "  bwd_transfer " << csv::format(result.bwd()) << '\n';
  return 0;
}

int cmd_report(const Flags& f, const std::vector<std::string>& dirs) {
  if (dirs.empty()) throw ConfigError("report needs at least one results directory");
  prepare_out(f.out, f.force);
  std::vector<RunSummary> runs;
  for (const auto& d : dirs) runs.push_back(summarize_results(d));
  const fs::path out(f.out);
  write_summary_csv(out / "summary.csv", runs);
  write_summary_json(out / "summary.json", runs);
  const std::pair<const char*, double RunSummary::*> metrics[] = {
      {"avg_f1", &RunSummary::avg_f1},
      {"fwd_transfer", &RunSummary::fwd_transfer},
      {"bwd_transfer", &RunSummary::bwd_transfer}};
  for (const auto& [name, member] : metrics) {
    std::vector<Bar> bars;
    for (const auto& r : runs) bars.push_back({r.name, r.*member});
    write_text(out / (std::string(name) + ".svg"), bar_chart_svg(name, bars));
  }
  std::cout << "summarized " << runs.size() << " run(s) into " << f.out << '\n';
  return 0;
}

void add_common(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config, "JSON config file");
  app.add_option("--seed", f.seed, "Seed for every random stream");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--baseline", f.baseline, "acorn, static_pca or static_ae");
  app.add_option("--ablate", f.ablate,
                 "no_metric_loss, no_recon_loss, no_memories or no_stored_pseudo_labels (repeatable)")
      ->allow_extra_args(false);
  app.add_option("--fit-scope", f.fit_scope, "Preprocessor fit rows for prepare: task0 or global");
  app.add_flag("--force", f.force, "Overwrite a non-empty output directory");
  app.add_flag("--show-config", f.show_config, "Print the resolved config and exit");
  app.add_flag("--dump-scores", f.dump_scores, "Write per-row scores for every evaluation");
  app.add_flag("--no-baseline-memory", f.no_baseline_memory, "Static baselines refit on the current clean set only");
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Continual novelty detection for tabular intrusion data", "acorn"};
  Flags f;
  add_common(app, f);
  app.require_subcommand(0, 1);

  std::string dataset, tasks_dir;
  std::vector<std::string> result_dirs;
  auto* synth = app.add_subcommand("synth", "Write a synthetic drifting dataset");
  auto* prepare = app.add_subcommand("prepare", "Split a dataset CSV into task directories");
  prepare->add_option("dataset", dataset, "Dataset CSV (defaults to data.path)");
  auto* run = app.add_subcommand("run", "Train and evaluate over a task stream");
  run->add_option("tasks", tasks_dir, "Prepared task directory (synthetic stream when omitted)");
  auto* report = app.add_subcommand("report", "Summarize results directories");
  report->add_option("results", result_dirs, "Results directories");
  for (auto* sub : {synth, prepare, run, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  // --ablate may be repeated or take a comma list.
  std::vector<std::string> ablations;
  for (const auto& a : f.ablate) {
    std::size_t start = 0;
    while (start <= a.size()) {
      const std::size_t comma = a.find(',', start);
      const std::string part = a.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      if (!part.empty()) ablations.push_back(part);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
  }
  f.ablate = ablations;

  try {
    if (f.show_config) {
      std::cout << to_json(resolve(f)).dump(2) << '\n';
      return 0;
    }
    if (synth->parsed()) return cmd_synth(f);
    if (prepare->parsed()) return cmd_prepare(f, dataset);
    if (run->parsed()) return cmd_run(f, tasks_dir);
    if (report->parsed()) return cmd_report(f, result_dirs);
    std::cerr << app.help();
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace acorn::cli
