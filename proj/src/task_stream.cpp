#include "acorn/task_stream.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "acorn/errors.hpp"
#include "acorn/rng.hpp"

namespace acorn {
namespace {

std::size_t fraction_count(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::lround(fraction * static_cast<double>(n)));
}

}  // namespace

std::string to_string(ScenarioMode m) { return m == ScenarioMode::EA ? "EA" : "ENA"; }

ScenarioMode scenario_mode_from_string(const std::string& s) {
  if (s == "EA" || s == "ea") return ScenarioMode::EA;
  if (s == "ENA" || s == "ena") return ScenarioMode::ENA;
  throw ConfigError("unknown scenario mode '" + s + "' (expected EA or ENA)");
}

void ScenarioSpec::validate(std::size_t num_classes) const {
  if (num_tasks < 1) throw ConfigError("scenario.num_tasks must be >= 1");
  if (!(clean_fraction > 0.0 && clean_fraction < 1.0)) {
    throw ConfigError("scenario.clean_fraction must lie in (0,1)");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("scenario.test_fraction must lie in (0,1)");
  }
  if (clean_fraction + test_fraction >= 1.0) {
    throw ConfigError("scenario.clean_fraction + scenario.test_fraction must be < 1");
  }
  if (num_classes > 0 && num_tasks > num_classes) {
    throw ConfigError("scenario.num_tasks (" + std::to_string(num_tasks) + ") exceeds the number of attack classes (" +
                      std::to_string(num_classes) + ")");
  }
}

void SyntheticSpec::validate() const {
  if (num_tasks < 1) throw ConfigError("synthetic.num_tasks must be >= 1");
  if (normals_per_task < 1) throw ConfigError("synthetic.normals_per_task must be >= 1");
  if (attacks_per_task < 1) throw ConfigError("synthetic.attacks_per_task must be >= 1");
  if (attack_classes_per_task < 1 || attack_classes_per_task > attacks_per_task) {
    throw ConfigError("synthetic.attack_classes_per_task must lie in [1, attacks_per_task]");
  }
  if (normal_rank < 1) throw ConfigError("synthetic.normal_rank must be >= 1");
  if (dim < normal_rank + 2) throw ConfigError("synthetic.dim must be >= normal_rank + 2");
  if (normal_cluster_spread < 0.0 || attack_offset < 0.0 || drift < 0.0 || noise < 0.0) {
    throw ConfigError("synthetic spreads, offsets and drift must be non-negative");
  }
  if (drift_off_subspace < 0.0 || drift_off_subspace > 1.0) {
    throw ConfigError("synthetic.drift_off_subspace must lie in [0,1]");
  }
}

std::vector<std::vector<std::string>> split_attacks_ordered(const std::vector<std::string>& classes,
                                                            std::size_t num_tasks) {
  if (num_tasks == 0) throw ConfigError("split_attacks: num_tasks must be >= 1");
  if (num_tasks > classes.size()) {
    throw ConfigError("split_attacks: " + std::to_string(num_tasks) + " tasks but only " +
                      std::to_string(classes.size()) + " attack classes");
  }
  std::vector<std::vector<std::string>> out(num_tasks);
  const std::size_t base = classes.size() / num_tasks;
  const std::size_t extra = classes.size() % num_tasks;
  std::size_t next = 0;
  for (std::size_t t = 0; t < num_tasks; ++t) {
    const std::size_t take = base + (t < extra ? 1 : 0);
    out[t].assign(classes.begin() + static_cast<std::ptrdiff_t>(next),
                  classes.begin() + static_cast<std::ptrdiff_t>(next + take));
    next += take;
  }
  return out;
}

std::vector<std::vector<std::string>> split_attacks(const std::vector<std::string>& classes,
                                                    std::size_t num_tasks, std::uint64_t seed) {
  std::vector<std::string> shuffled = classes;
  Rng rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  return split_attacks_ordered(shuffled, num_tasks);
}

std::vector<std::size_t> cluster_normals(const Matrix& x_normal, std::size_t num_tasks,
                                         std::uint64_t seed, const KMeansOptions& opts) {
  if (static_cast<std::size_t>(x_normal.rows()) < num_tasks) {
    throw DataError("cluster_normals: " + std::to_string(x_normal.rows()) + " normal rows for " +
                    std::to_string(num_tasks) + " tasks");
  }
  const Centroids c = fit_clusters(x_normal, num_tasks, seed, opts);
  return assign_clusters(c, x_normal);
}

namespace {

std::vector<TaskBundle> split_tasks(const LabeledDataset& data, const ScenarioSpec& spec,
                                    const std::vector<std::vector<std::size_t>>& task_normals,
                                    const std::vector<std::vector<std::string>>& class_sets,
                                    const std::map<std::string, std::vector<std::size_t>>& rows_by_class) {
  const std::size_t m = task_normals.size();
  std::vector<TaskBundle> tasks(m);
  for (std::size_t t = 0; t < m; ++t) {
    Rng rng = make_stream(spec.seed, "task_split", t);
    auto normals = task_normals[t];
    std::shuffle(normals.begin(), normals.end(), rng);
    const std::size_t n_clean = fraction_count(spec.clean_fraction, normals.size());
    const std::size_t n_test = fraction_count(spec.test_fraction, normals.size());
    if (n_clean == 0) throw DataError("task " + std::to_string(t) + " receives zero clean rows");
    if (n_clean + n_test > normals.size()) {
      throw DataError("task " + std::to_string(t) + " has too few normal rows to split");
    }

    TaskBundle& task = tasks[t];
    task.clean_rows.assign(normals.begin(), normals.begin() + static_cast<std::ptrdiff_t>(n_clean));
    task.test_rows.assign(normals.begin() + static_cast<std::ptrdiff_t>(n_clean),
                          normals.begin() + static_cast<std::ptrdiff_t>(n_clean + n_test));
    task.train_rows.assign(normals.begin() + static_cast<std::ptrdiff_t>(n_clean + n_test), normals.end());

    for (const auto& cls : class_sets[t]) {
      auto rows = rows_by_class.at(cls);
      std::shuffle(rows.begin(), rows.end(), rng);
      const std::size_t c_test = fraction_count(spec.test_fraction, rows.size());
      task.test_rows.insert(task.test_rows.end(), rows.begin(),
                            rows.begin() + static_cast<std::ptrdiff_t>(c_test));
      task.train_rows.insert(task.train_rows.end(), rows.begin() + static_cast<std::ptrdiff_t>(c_test),
                             rows.end());
      task.attack_classes_present.insert(cls);
    }
    if (task.test_rows.empty()) throw DataError("task " + std::to_string(t) + " receives zero test rows");
    if (task.train_rows.empty()) throw DataError("task " + std::to_string(t) + " receives zero train rows");
    std::shuffle(task.train_rows.begin(), task.train_rows.end(), rng);
    std::shuffle(task.test_rows.begin(), task.test_rows.end(), rng);

    task.x_clean = take_rows(data.x, task.clean_rows);
    task.x_train = take_rows(data.x, task.train_rows);
    task.x_test = take_rows(data.x, task.test_rows);
    for (auto r : task.test_rows) {
      task.y_test.push_back(data.y[r]);
      task.test_classes.push_back(data.classes[r]);
    }
  }
  return tasks;
}

}  // namespace

std::vector<TaskBundle> build_scenario(const LabeledDataset& data, const ScenarioSpec& spec,
                                       const KMeansOptions& opts) {
  if (data.size() == 0) throw DataError("build_scenario: empty dataset");

  std::vector<std::size_t> normal_rows;
  std::map<std::string, std::vector<std::size_t>> rows_by_class;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data.y[i] == 0) {
      normal_rows.push_back(i);
    } else {
      rows_by_class[data.classes[i]].push_back(i);
    }
  }
  std::vector<std::string> classes;
  for (const auto& [name, rows] : rows_by_class) classes.push_back(name);
  spec.validate(classes.size());
  if (classes.empty()) throw DataError("build_scenario: dataset has no attack rows");
  const std::size_t m = spec.num_tasks;

  const auto class_sets = split_attacks(classes, m, derive_seed(spec.seed, "attack_split"));

  std::vector<std::vector<std::size_t>> task_normals(m);
  if (spec.mode == ScenarioMode::EA) {
    std::vector<std::size_t> shuffled = normal_rows;
    Rng rng = make_stream(spec.seed, "normal_split");
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const std::size_t base = shuffled.size() / m;
    const std::size_t extra = shuffled.size() % m;
    std::size_t next = 0;
    for (std::size_t t = 0; t < m; ++t) {
      const std::size_t take = base + (t < extra ? 1 : 0);
      task_normals[t].assign(shuffled.begin() + static_cast<std::ptrdiff_t>(next),
                             shuffled.begin() + static_cast<std::ptrdiff_t>(next + take));
      next += take;
    }
  } else {
    const Matrix xn = take_rows(data.x, normal_rows);
    const auto owner = cluster_normals(xn, m, derive_seed(spec.seed, "normal_clusters"), opts);
    for (std::size_t i = 0; i < normal_rows.size(); ++i) task_normals[owner[i]].push_back(normal_rows[i]);
  }

  return split_tasks(data, spec, task_normals, class_sets, rows_by_class);
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng rng = make_stream(spec.seed, "synthetic");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const auto d = static_cast<Eigen::Index>(spec.dim);
  const auto s = static_cast<Eigen::Index>(spec.normal_rank);

  Matrix g(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = gauss(rng);
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();

  // Columns [0,s) span the normal subspace, column s carries the off-subspace
  // part of the drift, columns (s, d) host the attack offsets.
  const double off = spec.drift_off_subspace;
  const RowVector drift_dir = (std::sqrt(1.0 - off * off) * q.col(0) + off * q.col(s)).transpose();
  const Eigen::MatrixXd subspace = q.leftCols(s);
  const Eigen::MatrixXd attack_space = q.rightCols(d - s - 1);

  const std::size_t m = spec.num_tasks;
  const std::size_t k = spec.attack_classes_per_task;
  const std::size_t rows_total = m * (spec.normals_per_task + spec.attacks_per_task);
  Matrix x(static_cast<Eigen::Index>(rows_total), d);
  LabeledDataset out;
  out.y.reserve(rows_total);
  out.classes.reserve(rows_total);

  Eigen::Index row = 0;
  auto emit = [&](const RowVector& center, int label, const std::string& cls) {
    Eigen::VectorXd latent(s);
    for (Eigen::Index j = 0; j < s; ++j) latent(j) = gauss(rng) * spec.normal_cluster_spread;
    RowVector v = center + (subspace * latent).transpose();
    for (Eigen::Index j = 0; j < d; ++j) v(j) += gauss(rng) * spec.noise;
    x.row(row++) = v;
    out.y.push_back(label);
    out.classes.push_back(cls);
  };

  for (std::size_t t = 0; t < m; ++t) {
    const RowVector center = static_cast<double>(t) * spec.drift * drift_dir;
    for (std::size_t i = 0; i < spec.normals_per_task; ++i) emit(center, 0, "");
    for (std::size_t a = 0; a < k; ++a) {
      Eigen::VectorXd w(attack_space.cols());
      for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = gauss(rng);
      const RowVector dir = (attack_space * w.normalized()).transpose();
      const RowVector attack_center = center + spec.attack_offset * dir;
      const std::size_t count = spec.attacks_per_task / k + (a < spec.attacks_per_task % k ? 1 : 0);
      const std::string cls = "t" + std::to_string(t) + "_a" + std::to_string(a);
      for (std::size_t i = 0; i < count; ++i) emit(attack_center, 1, cls);
    }
  }

  const double lo = x.minCoeff();
  const double hi = x.maxCoeff();
  if (hi > lo) {
    x = (x.array() - lo) / (hi - lo);
  } else {
    x.setZero();
  }
  out.x = std::move(x);
  for (std::size_t j = 0; j < spec.dim; ++j) out.feature_names.push_back("x" + std::to_string(j));
  return out;
}

}  // namespace acorn
