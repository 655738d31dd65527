#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "acorn/ingest.hpp"
#include "acorn/pipeline.hpp"
#include "acorn/task_stream.hpp"

namespace acorn::cli {

struct DataConfig {
  std::string path;  // dataset CSV for `prepare`
  ColumnSchema schema;
  FitScope fit_scope = FitScope::task0;
};

// Resolved configuration for every subcommand. The top-level seed drives
// the synthetic generator, the scenario split and the run alike.
struct CliConfig {
  std::uint64_t seed = 0;
  SyntheticSpec synthetic;
  DataConfig data;
  RunConfig run;
  bool dump_scores = false;

  // Copies `seed` into the nested specs.
  void propagate_seed();
};

// Strict: unknown keys raise ConfigError; missing keys keep `base` values.
CliConfig cli_config_from_json(const nlohmann::json& j, CliConfig base = {});
CliConfig load_cli_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const CliConfig& c);
nlohmann::ordered_json to_json(const SyntheticSpec& s);

}  // namespace acorn::cli
