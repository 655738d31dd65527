#include "acorn/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "acorn/errors.hpp"
#include "acorn/kernels.hpp"
#include "acorn/pseudo_labeler.hpp"
#include "acorn/rng.hpp"

namespace acorn {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kAblationNames[] = {"no_metric_loss", "no_recon_loss", "no_memories",
                                          "no_stored_pseudo_labels"};

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown config key '" + where + "." + key + "'");
  }
}

template <class T>
void read_key(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
  }
}

struct CleanSplit {
  Matrix fit;
  Matrix validation;
};

CleanSplit split_clean(const Matrix& clean, double validation_fraction, Rng rng) {
  const auto n = static_cast<std::size_t>(clean.rows());
  auto n_val = static_cast<std::size_t>(std::lround(validation_fraction * static_cast<double>(n)));
  n_val = std::max<std::size_t>(n_val, 1);
  if (n < n_val + 2) {
    throw DataError("clean set of " + std::to_string(n) + " rows is too small for a PCA fit plus validation");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto all = std::span(order);
  return {take_rows(clean, all.subspan(n_val)), take_rows(clean, all.first(n_val))};
}

LabeledRows concat(const LabeledRows& a, const LabeledRows& b) {
  LabeledRows out;
  out.rows = vstack(a.rows, b.rows);
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

Vector validation_scores(const PipelineState& state, const RunConfig& cfg, const Matrix& validation) {
  return score_rows(state, cfg, validation);
}

void evaluate(const PipelineState& state, const std::vector<TaskBundle>& tasks, const RunConfig& cfg,
              TaskReport& report) {
  std::vector<Eigen::Index> offsets{0};
  Matrix all;
  for (const auto& t : tasks) {
    all = vstack(all, t.x_test);
    offsets.push_back(all.rows());
  }
  const auto start = std::chrono::steady_clock::now();
  const Vector scores = score_rows(state, cfg, all);
  const Labels predictions = classify(std::span(scores.data(), static_cast<std::size_t>(scores.size())),
                                      state.novelty->threshold.tau);
  const auto stop = std::chrono::steady_clock::now();
  report.inference_seconds = std::chrono::duration<double>(stop - start).count();
  report.inference_samples = static_cast<std::size_t>(all.rows());

  for (std::size_t j = 0; j < tasks.size(); ++j) {
    TestEvaluation ev;
    const Eigen::Index begin = offsets[j];
    const Eigen::Index len = offsets[j + 1] - begin;
    ev.scores = scores.segment(begin, len);
    ev.predictions.assign(predictions.begin() + begin, predictions.begin() + begin + len);
    const auto& y = tasks[j].y_test;
    ev.f1 = f1(ev.predictions, y);
    const bool has_positive = std::any_of(y.begin(), y.end(), [](int v) { return v != 0; });
    ev.pr_auc = has_positive
                    ? pr_auc(std::span(ev.scores.data(), static_cast<std::size_t>(ev.scores.size())), y)
                    : std::numeric_limits<double>::quiet_NaN();
    report.evaluations.push_back(std::move(ev));
  }
}

TrainOptions train_options(const RunConfig& cfg) {
  TrainOptions o;
  o.epochs = cfg.cfe.epochs;
  o.batch_size = cfg.cfe.batch_size;
  o.margin = cfg.cfe.margin;
  o.loss.use_metric = !cfg.ablations.no_metric_loss;
  o.loss.use_recon = !cfg.ablations.no_recon_loss;
  o.loss.squared_distance = cfg.cfe.squared_distance;
  return o;
}

void run_acorn_task(PipelineState& state, const TaskBundle& task, const RunConfig& cfg, TaskReport& report) {
  const std::size_t t = state.task_index;
  const bool use_memory = !cfg.ablations.no_memories;

  const LabeledRows clean_batch = with_label(task.x_clean, -1);
  const LabeledRows clean = use_memory ? merge_with(state.normal_memory, clean_batch) : clean_batch;
  if (use_memory) state.normal_memory.offer_all(clean_batch);

  const auto n_train = static_cast<std::size_t>(task.x_train.rows());
  const std::size_t k_max = std::min(cfg.pseudo_labeler.k_max, n_train);
  const std::size_t k_min = std::min(cfg.pseudo_labeler.k_min, k_max);
  std::size_t k = k_max;
  if (k_min < k_max) {
    const ElbowResult elbow =
        elbow_k(task.x_train, k_min, k_max, derive_seed(cfg.seed, "elbow", t), cfg.pseudo_labeler.kmeans);
    k = elbow.k;
    report.elbow_inertia = elbow.inertia;
  }
  const Centroids centroids =
      fit_clusters(task.x_train, k, derive_seed(cfg.seed, "kmeans", t), cfg.pseudo_labeler.kmeans);
  const PseudoLabels pl = assign_pseudo_labels(centroids, task.x_train, clean.rows);
  report.k = centroids.k();
  report.pseudo_normal = static_cast<std::size_t>(std::count(pl.labels.begin(), pl.labels.end(), 0));
  report.pseudo_anomalous = pl.labels.size() - report.pseudo_normal;

  const LabeledRows train_batch{task.x_train, pl.labels};
  LabeledRows train = train_batch;
  if (use_memory) {
    LabeledRows stored = state.train_memory.snapshot();
    if (cfg.ablations.no_stored_pseudo_labels) {
      stored.labels = relabel(centroids, pl.normal_cluster_mask, stored.rows);
    }
    train = concat(stored, train_batch);
    state.train_memory.offer_all(cfg.ablations.no_stored_pseudo_labels ? with_label(task.x_train, -1)
                                                                        : train_batch);
  }
  report.clean_rows = clean.size();
  report.train_rows = train.size();

  if (!state.cfe) {
    Rng init = make_stream(cfg.seed, "init");
    state.cfe = make_autoencoder(task.dim(), cfg.cfe.hidden, init);
    state.adam = AdamState::zeros_for(*state.cfe, {.learning_rate = cfg.cfe.learning_rate});
  }
  Rng shuffle_rng = make_stream(cfg.seed, "shuffle", t);
  Rng mining_rng = make_stream(cfg.seed, "mining", t);
  report.loss_trace =
      train_epochs(*state.cfe, *state.adam, train.rows, train.labels, train_options(cfg), shuffle_rng, mining_rng);
  if (!state.cfe->all_finite()) throw NumericError("feature extractor parameters became non-finite");

  const CleanSplit split = split_clean(clean.rows, cfg.novelty.validation_fraction,
                                       make_stream(cfg.seed, "validation", t));
  state.novelty = NoveltyModel{fit_pca(encode(*state.cfe, split.fit), cfg.novelty.variance_target), {}};
  const Vector val = validation_scores(state, cfg, split.validation);
  state.novelty->threshold = calibrate_threshold(std::span(val.data(), static_cast<std::size_t>(val.size())));
}

void run_baseline_task(PipelineState& state, const TaskBundle& task, const RunConfig& cfg, TaskReport& report) {
  const std::size_t t = state.task_index;
  const LabeledRows clean_batch = with_label(task.x_clean, -1);
  const LabeledRows clean = cfg.baseline_memory ? merge_with(state.normal_memory, clean_batch) : clean_batch;
  if (cfg.baseline_memory) state.normal_memory.offer_all(clean_batch);
  report.clean_rows = clean.size();

  const CleanSplit split = split_clean(clean.rows, cfg.novelty.validation_fraction,
                                       make_stream(cfg.seed, "validation", t));
  if (cfg.baseline == BaselineMode::static_pca) {
    state.novelty = NoveltyModel{fit_pca(split.fit, cfg.novelty.variance_target), {}};
  } else {
    Rng init = make_stream(cfg.seed, "init", t);
    state.static_ae = make_autoencoder(task.dim(), cfg.cfe.hidden, init);
    AdamState adam = AdamState::zeros_for(*state.static_ae, {.learning_rate = cfg.cfe.learning_rate});
    TrainOptions o = train_options(cfg);
    o.loss = {.use_metric = false, .use_recon = true, .squared_distance = false};
    Rng shuffle_rng = make_stream(cfg.seed, "shuffle", t);
    Rng mining_rng = make_stream(cfg.seed, "mining", t);
    const Labels zeros(static_cast<std::size_t>(split.fit.rows()), 0);
    report.loss_trace = train_epochs(*state.static_ae, adam, split.fit, zeros, o, shuffle_rng, mining_rng);
    if (!state.static_ae->all_finite()) throw NumericError("autoencoder parameters became non-finite");
    state.novelty = NoveltyModel{};
  }
  const Vector val = validation_scores(state, cfg, split.validation);
  state.novelty->threshold = calibrate_threshold(std::span(val.data(), static_cast<std::size_t>(val.size())));
}

ordered_json matrix_json(const ScoreMatrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (std::isfinite(m(i, j))) {
        row.push_back(m(i, j));
      } else {
        row.push_back(nullptr);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string to_string(BaselineMode m) {
  switch (m) {
    case BaselineMode::acorn: return "acorn";
    case BaselineMode::static_pca: return "static_pca";
    case BaselineMode::static_ae: return "static_ae";
  }
  return "acorn";
}

BaselineMode baseline_mode_from_string(const std::string& s) {
  if (s == "acorn") return BaselineMode::acorn;
  if (s == "static_pca") return BaselineMode::static_pca;
  if (s == "static_ae") return BaselineMode::static_ae;
  throw ConfigError("unknown baseline mode '" + s + "' (expected acorn, static_pca or static_ae)");
}

std::string to_string(FitScope s) { return s == FitScope::task0 ? "task0" : "global"; }

FitScope fit_scope_from_string(const std::string& s) {
  if (s == "task0") return FitScope::task0;
  if (s == "global") return FitScope::global;
  throw ConfigError("unknown preprocessing fit scope '" + s + "' (expected task0 or global)");
}

std::vector<std::string> Ablations::names() const {
  std::vector<std::string> out;
  const bool flags[] = {no_metric_loss, no_recon_loss, no_memories, no_stored_pseudo_labels};
  for (std::size_t i = 0; i < 4; ++i)
    if (flags[i]) out.emplace_back(kAblationNames[i]);
  return out;
}

void Ablations::enable(const std::string& name) {
  if (name == "no_metric_loss") {
    no_metric_loss = true;
  } else if (name == "no_recon_loss") {
    no_recon_loss = true;
  } else if (name == "no_memories") {
    no_memories = true;
  } else if (name == "no_stored_pseudo_labels") {
    no_stored_pseudo_labels = true;
  } else {
    throw ConfigError("unknown ablation '" + name + "'");
  }
}

void RunConfig::validate() const {
  scenario.validate();
  if (cfe.hidden.empty() || std::find(cfe.hidden.begin(), cfe.hidden.end(), 0) != cfe.hidden.end()) {
    throw ConfigError("cfe.hidden must list positive layer widths");
  }
  if (cfe.batch_size == 0) throw ConfigError("cfe.batch_size must be >= 1");
  if (!(cfe.margin > 0.0)) throw ConfigError("cfe.margin must be > 0");
  if (!(cfe.learning_rate > 0.0)) throw ConfigError("cfe.learning_rate must be > 0");
  if (pseudo_labeler.k_min < 1 || pseudo_labeler.k_min >= pseudo_labeler.k_max) {
    throw ConfigError("pseudo_labeler needs 1 <= k_min < k_max");
  }
  if (pseudo_labeler.kmeans.batch_size == 0 || pseudo_labeler.kmeans.max_epochs < 1) {
    throw ConfigError("pseudo_labeler batch_size and max_epochs must be >= 1");
  }
  if (!(novelty.variance_target > 0.0 && novelty.variance_target <= 1.0)) {
    throw ConfigError("novelty.variance_target must lie in (0,1]");
  }
  if (!(novelty.validation_fraction > 0.0 && novelty.validation_fraction < 1.0)) {
    throw ConfigError("novelty.validation_fraction must lie in (0,1)");
  }
  if (ablations.no_metric_loss && ablations.no_recon_loss) {
    throw ConfigError("ablations no_metric_loss and no_recon_loss together leave no training signal");
  }
  if (ablations.any() && baseline != BaselineMode::acorn) {
    throw ConfigError("ablations apply only to the acorn mode");
  }
}

PipelineState::PipelineState(const RunConfig& cfg)
    : normal_memory(cfg.memory.normal_capacity, make_stream(cfg.seed, "reservoir_normal")),
      train_memory(cfg.memory.train_capacity, make_stream(cfg.seed, "reservoir_train")) {}

Vector score_rows(const PipelineState& state, const RunConfig& cfg, const Matrix& x) {
  switch (cfg.baseline) {
    case BaselineMode::acorn:
      return fre_score(state.novelty->basis, encode(*state.cfe, x));
    case BaselineMode::static_pca:
      return fre_score(state.novelty->basis, x);
    case BaselineMode::static_ae:
      return kernels::row_mse(x, decode(*state.static_ae, encode(*state.static_ae, x)));
  }
  return {};
}

TaskReport run_task(PipelineState& state, const std::vector<TaskBundle>& tasks, const RunConfig& cfg) {
  if (state.task_index >= tasks.size()) throw DataError("run_task: no task left to train on");
  const TaskBundle& task = tasks[state.task_index];
  if (state.cfe && task.dim() != state.cfe->input_dim()) {
    throw DataError("task " + std::to_string(state.task_index) + " has " + std::to_string(task.dim()) +
                    " features, the model expects " + std::to_string(state.cfe->input_dim()));
  }
  TaskReport report;
  report.task = state.task_index;
  try {
    if (cfg.baseline == BaselineMode::acorn) {
      run_acorn_task(state, task, cfg, report);
    } else {
      run_baseline_task(state, task, cfg, report);
    }
  } catch (const NumericError& e) {
    throw NumericError("task " + std::to_string(state.task_index) + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("task " + std::to_string(state.task_index) + ": " + e.what());
  }
  report.pca_rank = state.novelty->basis.rank();
  report.threshold = state.novelty->threshold;
  report.normal_memory_seen = state.normal_memory.seen();
  report.train_memory_seen = state.train_memory.seen();
  evaluate(state, tasks, cfg, report);
  ++state.task_index;
  return report;
}

double ScenarioResult::mean_inference_seconds_per_sample() const {
  double seconds = 0.0;
  std::size_t samples = 0;
  for (const auto& t : tasks) {
    seconds += t.inference_seconds;
    samples += t.inference_samples;
  }
  return samples ? seconds / static_cast<double>(samples) : 0.0;
}

ScenarioResult run_scenario(const RunConfig& cfg, const std::vector<TaskBundle>& tasks) {
  cfg.validate();
  if (tasks.empty()) throw DataError("run_scenario: no tasks");
  const std::size_t m = tasks.size();
  ScenarioResult result;
  result.f1 = ScoreMatrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  result.pr_auc = result.f1;
  PipelineState state(cfg);
  for (std::size_t i = 0; i < m; ++i) {
    TaskReport report = run_task(state, tasks, cfg);
    for (std::size_t j = 0; j < m; ++j) {
      result.f1(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = report.evaluations[j].f1;
      result.pr_auc(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = report.evaluations[j].pr_auc;
    }
    result.tasks.push_back(std::move(report));
  }
  return result;
}

ScenarioResult run_static_baseline(BaselineMode mode, const std::vector<TaskBundle>& tasks, const RunConfig& cfg) {
  if (mode == BaselineMode::acorn) throw ConfigError("run_static_baseline needs static_pca or static_ae");
  RunConfig c = cfg;
  c.baseline = mode;
  c.ablations = {};
  return run_scenario(c, tasks);
}

ordered_json to_json(const RunConfig& cfg) {
  ordered_json j;
  j["seed"] = cfg.seed;
  j["scenario"] = {{"mode", to_string(cfg.scenario.mode)},
                   {"num_tasks", cfg.scenario.num_tasks},
                   {"clean_fraction", cfg.scenario.clean_fraction},
                   {"test_fraction", cfg.scenario.test_fraction}};
  j["cfe"] = {{"hidden", cfg.cfe.hidden},
              {"epochs", cfg.cfe.epochs},
              {"batch_size", cfg.cfe.batch_size},
              {"margin", cfg.cfe.margin},
              {"learning_rate", cfg.cfe.learning_rate},
              {"squared_distance", cfg.cfe.squared_distance}};
  j["memory"] = {{"normal_capacity", cfg.memory.normal_capacity}, {"train_capacity", cfg.memory.train_capacity}};
  j["pseudo_labeler"] = {{"k_min", cfg.pseudo_labeler.k_min},
                         {"k_max", cfg.pseudo_labeler.k_max},
                         {"batch_size", cfg.pseudo_labeler.kmeans.batch_size},
                         {"max_epochs", cfg.pseudo_labeler.kmeans.max_epochs},
                         {"tolerance", cfg.pseudo_labeler.kmeans.tolerance}};
  j["novelty"] = {{"variance_target", cfg.novelty.variance_target},
                  {"validation_fraction", cfg.novelty.validation_fraction}};
  j["run"] = {{"baseline", to_string(cfg.baseline)},
              {"baseline_memory", cfg.baseline_memory},
              {"ablations", cfg.ablations.names()}};
  return j;
}

RunConfig run_config_from_json(const json& j, RunConfig base) {
  RunConfig c = std::move(base);
  check_keys(j, {"seed", "scenario", "cfe", "memory", "pseudo_labeler", "novelty", "run"}, "config");
  read_key(j, "seed", c.seed, "config");
  if (j.contains("scenario")) {
    const auto& s = j["scenario"];
    check_keys(s, {"mode", "num_tasks", "clean_fraction", "test_fraction"}, "scenario");
    std::string mode = to_string(c.scenario.mode);
    read_key(s, "mode", mode, "scenario");
    c.scenario.mode = scenario_mode_from_string(mode);
    read_key(s, "num_tasks", c.scenario.num_tasks, "scenario");
    read_key(s, "clean_fraction", c.scenario.clean_fraction, "scenario");
    read_key(s, "test_fraction", c.scenario.test_fraction, "scenario");
  }
  if (j.contains("cfe")) {
    const auto& s = j["cfe"];
    check_keys(s, {"hidden", "epochs", "batch_size", "margin", "learning_rate", "squared_distance"}, "cfe");
    read_key(s, "hidden", c.cfe.hidden, "cfe");
    read_key(s, "epochs", c.cfe.epochs, "cfe");
    read_key(s, "batch_size", c.cfe.batch_size, "cfe");
    read_key(s, "margin", c.cfe.margin, "cfe");
    read_key(s, "learning_rate", c.cfe.learning_rate, "cfe");
    read_key(s, "squared_distance", c.cfe.squared_distance, "cfe");
  }
  if (j.contains("memory")) {
    const auto& s = j["memory"];
    check_keys(s, {"normal_capacity", "train_capacity"}, "memory");
    read_key(s, "normal_capacity", c.memory.normal_capacity, "memory");
    read_key(s, "train_capacity", c.memory.train_capacity, "memory");
  }
  if (j.contains("pseudo_labeler")) {
    const auto& s = j["pseudo_labeler"];
    check_keys(s, {"k_min", "k_max", "batch_size", "max_epochs", "tolerance"}, "pseudo_labeler");
    read_key(s, "k_min", c.pseudo_labeler.k_min, "pseudo_labeler");
    read_key(s, "k_max", c.pseudo_labeler.k_max, "pseudo_labeler");
    read_key(s, "batch_size", c.pseudo_labeler.kmeans.batch_size, "pseudo_labeler");
    read_key(s, "max_epochs", c.pseudo_labeler.kmeans.max_epochs, "pseudo_labeler");
    read_key(s, "tolerance", c.pseudo_labeler.kmeans.tolerance, "pseudo_labeler");
  }
  if (j.contains("novelty")) {
    const auto& s = j["novelty"];
    check_keys(s, {"variance_target", "validation_fraction"}, "novelty");
    read_key(s, "variance_target", c.novelty.variance_target, "novelty");
    read_key(s, "validation_fraction", c.novelty.validation_fraction, "novelty");
  }
  if (j.contains("run")) {
    const auto& s = j["run"];
    check_keys(s, {"baseline", "baseline_memory", "ablations"}, "run");
    std::string mode = to_string(c.baseline);
    read_key(s, "baseline", mode, "run");
    c.baseline = baseline_mode_from_string(mode);
    read_key(s, "baseline_memory", c.baseline_memory, "run");
    if (s.contains("ablations")) {
      std::vector<std::string> names;
      read_key(s, "ablations", names, "run");
      c.ablations = {};
      for (const auto& n : names) c.ablations.enable(n);
    }
  }
  c.scenario.seed = c.seed;
  return c;
}

ordered_json run_manifest(const RunConfig& cfg, const ScenarioResult& result) {
  ordered_json j;
  j["config"] = to_json(cfg);
  ordered_json tasks = ordered_json::array();
  for (const auto& t : result.tasks) {
    ordered_json tj;
    tj["task"] = t.task;
    tj["k"] = t.k;
    tj["elbow_inertia"] = t.elbow_inertia;
    tj["pseudo_normal"] = t.pseudo_normal;
    tj["pseudo_anomalous"] = t.pseudo_anomalous;
    tj["clean_rows"] = t.clean_rows;
    tj["train_rows"] = t.train_rows;
    tj["pca_rank"] = t.pca_rank;
    tj["threshold"] = {{"mean", t.threshold.mean}, {"stddev", t.threshold.stddev}, {"tau", t.threshold.tau}};
    tj["normal_memory_seen"] = t.normal_memory_seen;
    tj["train_memory_seen"] = t.train_memory_seen;
    tj["train_steps"] = t.loss_trace.size();
    if (!t.loss_trace.empty()) {
      const auto& last = t.loss_trace.back();
      tj["final_loss"] = {{"metric", last.metric}, {"recon", last.recon}, {"total", last.total}};
    }
    tasks.push_back(std::move(tj));
  }
  j["tasks"] = std::move(tasks);
  j["f1"] = matrix_json(result.f1);
  j["pr_auc"] = matrix_json(result.pr_auc);
  j["metrics"] = {{"avg_f1", result.avg()}, {"fwd_transfer", result.fwd()}, {"bwd_transfer", result.bwd()}};
  return j;
}

PreparedScenario prepare_scenario(const RawDataset& raw, const ScenarioSpec& spec, FitScope scope,
                                  const KMeansOptions& opts) {
  const Preprocessor global = fit_preprocessor(raw);
  const LabeledDataset view = apply_preprocessor(global, raw);
  std::vector<TaskBundle> tasks = build_scenario(view, spec, opts);

  PreparedScenario out;
  if (scope == FitScope::global) {
    out.preprocessor = global;
  } else {
    std::vector<std::size_t> rows = tasks[0].clean_rows;
    rows.insert(rows.end(), tasks[0].train_rows.begin(), tasks[0].train_rows.end());
    out.preprocessor = fit_preprocessor(select_rows(raw, rows));
  }
  const LabeledDataset data = scope == FitScope::global ? view : apply_preprocessor(out.preprocessor, raw);
  for (auto& t : tasks) {
    t.x_clean = take_rows(data.x, t.clean_rows);
    t.x_train = take_rows(data.x, t.train_rows);
    t.x_test = take_rows(data.x, t.test_rows);
  }
  out.tasks = std::move(tasks);
  out.feature_names = data.feature_names;
  return out;
}

}  // namespace acorn
