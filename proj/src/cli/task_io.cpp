#include "acorn/cli/task_io.hpp"

#include <cstdio>
#include <fstream>

#include "acorn/csv.hpp"
#include "acorn/errors.hpp"

namespace acorn::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

std::string task_dir_name(std::size_t task) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "task_%03zu", task);
  return buf;
}

ordered_json scenario_manifest(const ScenarioSpec& spec, const std::vector<TaskBundle>& tasks) {
  ordered_json j;
  j["mode"] = to_string(spec.mode);
  j["seed"] = spec.seed;
  j["num_tasks"] = tasks.size();
  j["clean_fraction"] = spec.clean_fraction;
  j["test_fraction"] = spec.test_fraction;
  ordered_json list = ordered_json::array();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    std::size_t attacks = 0;
    for (int y : t.y_test) attacks += y != 0;
    list.push_back({{"task", i},
                    {"dir", task_dir_name(i)},
                    {"attack_classes", std::vector<std::string>(t.attack_classes_present.begin(),
                                                                t.attack_classes_present.end())},
                    {"clean_rows", t.x_clean.rows()},
                    {"train_rows", t.x_train.rows()},
                    {"test_rows", t.x_test.rows()},
                    {"test_attacks", attacks}});
  }
  j["tasks"] = std::move(list);
  return j;
}

void write_tasks(const fs::path& dir, const std::vector<TaskBundle>& tasks,
                 const std::vector<std::string>& feature_names) {
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const auto& t = tasks[i];
    const fs::path sub = dir / task_dir_name(i);
    fs::create_directories(sub);
    csv::write_matrix(sub / "X_clean.csv", t.x_clean, feature_names);
    csv::write_matrix(sub / "X_train.csv", t.x_train, feature_names);
    csv::write_matrix(sub / "X_test.csv", t.x_test, feature_names);
    std::ofstream y(sub / "Y_test.csv", std::ios::binary);
    if (!y) throw DataError("cannot write " + (sub / "Y_test.csv").string());
    y << "label,attack_class\n";
    for (std::size_t r = 0; r < t.y_test.size(); ++r) {
      y << t.y_test[r] << ',' << (r < t.test_classes.size() ? t.test_classes[r] : std::string()) << '\n';
    }
    if (!y) throw DataError("write failed: " + (sub / "Y_test.csv").string());
  }
}

LoadedTasks load_tasks(const fs::path& dir) {
  LoadedTasks out;
  const fs::path manifest = dir / "scenario.json";
  std::ifstream in(manifest);
  if (!in) throw DataError(dir.string() + " is not a prepared scenario (missing scenario.json)");
  try {
    out.scenario = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(manifest.string() + ": " + e.what());
  }
  const auto m = out.scenario.value("num_tasks", std::size_t{0});
  if (m == 0) throw DataError(manifest.string() + ": num_tasks missing or zero");
  for (std::size_t i = 0; i < m; ++i) {
    const fs::path sub = dir / task_dir_name(i);
    TaskBundle t;
    std::vector<std::string> header;
    t.x_clean = csv::read_matrix(sub / "X_clean.csv", &header);
    if (i == 0) out.feature_names = header;
    t.x_train = csv::read_matrix(sub / "X_train.csv");
    t.x_test = csv::read_matrix(sub / "X_test.csv");
    const auto d = t.x_clean.cols();
    if (t.x_train.cols() != d || t.x_test.cols() != d ||
        d != static_cast<Eigen::Index>(out.feature_names.size())) {
      throw DataError(sub.string() + ": feature count differs between files or tasks");
    }
    const csv::Table y = csv::read(sub / "Y_test.csv");
    if (y.rows.size() != static_cast<std::size_t>(t.x_test.rows())) {
      throw DataError(sub.string() + ": Y_test.csv has " + std::to_string(y.rows.size()) + " rows, X_test.csv has " +
                      std::to_string(t.x_test.rows()));
    }
    for (std::size_t r = 0; r < y.rows.size(); ++r) {
      bool ok = false;
      const double v = y.rows[r].empty() ? 0.0 : csv::parse_double(y.rows[r][0], ok);
      if (!ok || (v != 0.0 && v != 1.0)) {
        throw DataError((sub / "Y_test.csv").string() + ": row " + std::to_string(r + 1) + ": label must be 0 or 1");
      }
      t.y_test.push_back(static_cast<int>(v));
      t.test_classes.push_back(y.rows[r].size() > 1 ? y.rows[r][1] : std::string());
      if (v != 0.0) t.attack_classes_present.insert(t.test_classes.back());
    }
    out.tasks.push_back(std::move(t));
  }
  return out;
}

}  // namespace acorn::cli
