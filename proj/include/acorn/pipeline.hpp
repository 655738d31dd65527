#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "acorn/cfe.hpp"
#include "acorn/ingest.hpp"
#include "acorn/kmeans.hpp"
#include "acorn/memory.hpp"
#include "acorn/metrics.hpp"
#include "acorn/novelty.hpp"
#include "acorn/task_stream.hpp"

namespace acorn {

enum class BaselineMode { acorn, static_pca, static_ae };

std::string to_string(BaselineMode m);
BaselineMode baseline_mode_from_string(const std::string& s);

struct Ablations {
  bool no_metric_loss = false;
  bool no_recon_loss = false;
  bool no_memories = false;
  bool no_stored_pseudo_labels = false;

  bool any() const { return no_metric_loss || no_recon_loss || no_memories || no_stored_pseudo_labels; }
  std::vector<std::string> names() const;
  void enable(const std::string& name);  // throws ConfigError on unknown names
};

struct CfeConfig {
  std::vector<std::size_t> hidden = {256, 512, 256};
  std::size_t epochs = 20;
  std::size_t batch_size = 256;
  double margin = 0.2;
  double learning_rate = 1e-3;
  bool squared_distance = false;
};

struct MemoryConfig {
  std::size_t normal_capacity = 10000;
  std::size_t train_capacity = 10000;
};

struct PseudoLabelConfig {
  std::size_t k_min = 2;
  std::size_t k_max = 15;
  KMeansOptions kmeans;
};

struct NoveltyConfig {
  double variance_target = 0.95;
  double validation_fraction = 0.2;
};

struct RunConfig {
  ScenarioSpec scenario;
  CfeConfig cfe;
  MemoryConfig memory;
  PseudoLabelConfig pseudo_labeler;
  NoveltyConfig novelty;
  Ablations ablations;
  BaselineMode baseline = BaselineMode::acorn;
  // Static baselines refit on clean data plus the normal-data memory.
  bool baseline_memory = true;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

struct TestEvaluation {
  Vector scores;
  Labels predictions;
  double f1 = 0.0;
  double pr_auc = 0.0;
};

struct TaskReport {
  std::size_t task = 0;
  std::size_t k = 0;  // pseudo-labeler clusters (0 for static baselines)
  std::vector<double> elbow_inertia;
  std::size_t pseudo_normal = 0;
  std::size_t pseudo_anomalous = 0;
  std::size_t clean_rows = 0;  // after merging the normal memory
  std::size_t train_rows = 0;  // after merging the train memory
  std::size_t pca_rank = 0;
  Threshold threshold;
  std::size_t normal_memory_seen = 0;
  std::size_t train_memory_seen = 0;
  std::vector<LossRecord> loss_trace;
  std::vector<TestEvaluation> evaluations;  // one per test task
  double inference_seconds = 0.0;
  std::size_t inference_samples = 0;
};

class PipelineState {
 public:
  explicit PipelineState(const RunConfig& cfg);

  std::size_t task_index = 0;
  ReservoirBuffer normal_memory;
  ReservoirBuffer train_memory;
  std::optional<EncoderDecoderParams> cfe;
  std::optional<AdamState> adam;
  std::optional<NoveltyModel> novelty;
  std::optional<EncoderDecoderParams> static_ae;
};

// Trains on `tasks[state.task_index]`, then scores every task's test set.
TaskReport run_task(PipelineState& state, const std::vector<TaskBundle>& tasks, const RunConfig& cfg);

// Scores rows with the frozen model held by `state` (never mutates it).
Vector score_rows(const PipelineState& state, const RunConfig& cfg, const Matrix& x);

struct ScenarioResult {
  ScoreMatrix f1;
  ScoreMatrix pr_auc;
  std::vector<TaskReport> tasks;

  double avg() const { return avg_f1(f1); }
  double fwd() const { return fwd_transfer(f1); }
  double bwd() const { return bwd_transfer(f1); }
  double mean_inference_seconds_per_sample() const;
};

ScenarioResult run_scenario(const RunConfig& cfg, const std::vector<TaskBundle>& tasks);
ScenarioResult run_static_baseline(BaselineMode mode, const std::vector<TaskBundle>& tasks, const RunConfig& cfg);

// Everything needed to reproduce the run, without wall-clock data.
nlohmann::ordered_json run_manifest(const RunConfig& cfg, const ScenarioResult& result);

nlohmann::ordered_json to_json(const RunConfig& cfg);
// Strict: unknown keys raise ConfigError. Missing keys keep `base` values.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});

enum class FitScope { task0, global };
std::string to_string(FitScope s);
FitScope fit_scope_from_string(const std::string& s);

struct PreparedScenario {
  std::vector<TaskBundle> tasks;
  Preprocessor preprocessor;
  std::vector<std::string> feature_names;
};

// Partitions a raw dataset into tasks and preprocesses it. Task assignment is
// computed on a globally preprocessed view; the preprocessor applied to the
// task matrices is fit on task 0 (clean + train rows) unless scope is global.
PreparedScenario prepare_scenario(const RawDataset& raw, const ScenarioSpec& spec, FitScope scope,
                                  const KMeansOptions& opts = {});

}  // namespace acorn
