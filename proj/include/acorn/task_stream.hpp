#pragma once

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "acorn/ingest.hpp"
#include "acorn/kmeans.hpp"
#include "acorn/matrix.hpp"

namespace acorn {

enum class ScenarioMode { EA, ENA };

std::string to_string(ScenarioMode m);
ScenarioMode scenario_mode_from_string(const std::string& s);

struct ScenarioSpec {
  ScenarioMode mode = ScenarioMode::ENA;
  std::size_t num_tasks = 4;
  double clean_fraction = 0.1;
  double test_fraction = 0.3;
  std::uint64_t seed = 0;

  // Throws ConfigError. `num_classes` is checked against num_tasks when given.
  void validate(std::size_t num_classes = 0) const;
};

struct TaskBundle {
  Matrix x_clean;
  Matrix x_train;
  Matrix x_test;
  Labels y_test;
  std::vector<std::string> test_classes;
  std::set<std::string> attack_classes_present;

  // Row indices into the source dataset; not visible to the learner.
  std::vector<std::size_t> clean_rows;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;

  std::size_t dim() const { return static_cast<std::size_t>(x_clean.cols()); }
};

struct SyntheticSpec {
  std::size_t dim = 20;
  std::size_t num_tasks = 4;
  std::size_t normals_per_task = 2000;
  std::size_t attacks_per_task = 500;
  std::size_t attack_classes_per_task = 1;
  // Std-dev of a normal cluster along its low-rank principal directions.
  double normal_cluster_spread = 1.0;
  // Distance of every attack cluster from its task's normal center.
  double attack_offset = 3.0;
  // Center-to-center step between consecutive tasks' normal clusters.
  double drift = 6.0;
  // Share of each drift step that leaves the normal subspace.
  double drift_off_subspace = 0.08;
  std::size_t normal_rank = 2;
  // Isotropic noise std-dev added to every row.
  double noise = 0.1;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

// Deterministic near-equal contiguous split in the given order; the first
// |classes| mod m subsets get one extra class.
std::vector<std::vector<std::string>> split_attacks_ordered(const std::vector<std::string>& classes,
                                                            std::size_t num_tasks);
// Seeded shuffle, then split_attacks_ordered.
std::vector<std::vector<std::string>> split_attacks(const std::vector<std::string>& classes,
                                                    std::size_t num_tasks, std::uint64_t seed);

std::vector<std::size_t> cluster_normals(const Matrix& x_normal, std::size_t num_tasks,
                                         std::uint64_t seed, const KMeansOptions& opts = {});

std::vector<TaskBundle> build_scenario(const LabeledDataset& data, const ScenarioSpec& spec,
                                       const KMeansOptions& opts = {});

// Normal clusters drift along a straight line, mostly inside a shared
// low-rank subspace; attack clusters sit attack_offset away from their task's
// normal center in directions orthogonal to both. The whole dataset is mapped
// into [0,1] with one global affine scale so geometry is preserved.
// Class tags are "t<task>_a<k>".
LabeledDataset generate_synthetic(const SyntheticSpec& spec);

}  // namespace acorn
