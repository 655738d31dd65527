#pragma once

// On-disk layout of a prepared scenario:
//   scenario.json  preprocessor.json
//   task_000/X_clean.csv X_train.csv X_test.csv Y_test.csv
//   task_001/...

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "acorn/task_stream.hpp"

namespace acorn::cli {

std::string task_dir_name(std::size_t task);

void write_tasks(const std::filesystem::path& dir, const std::vector<TaskBundle>& tasks,
                 const std::vector<std::string>& feature_names);
nlohmann::ordered_json scenario_manifest(const ScenarioSpec& spec, const std::vector<TaskBundle>& tasks);

struct LoadedTasks {
  std::vector<TaskBundle> tasks;
  std::vector<std::string> feature_names;
  nlohmann::json scenario;  // contents of scenario.json
};

LoadedTasks load_tasks(const std::filesystem::path& dir);

}  // namespace acorn::cli
