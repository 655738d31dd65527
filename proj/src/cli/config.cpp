#include "acorn/cli/config.hpp"

#include <fstream>
#include <set>

#include "acorn/errors.hpp"

namespace acorn::cli {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

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

}  // namespace

void CliConfig::propagate_seed() {
  synthetic.seed = seed;
  run.seed = seed;
  run.scenario.seed = seed;
}

ordered_json to_json(const SyntheticSpec& s) {
  return {{"dim", s.dim},
          {"num_tasks", s.num_tasks},
          {"normals_per_task", s.normals_per_task},
          {"attacks_per_task", s.attacks_per_task},
          {"attack_classes_per_task", s.attack_classes_per_task},
          {"normal_cluster_spread", s.normal_cluster_spread},
          {"attack_offset", s.attack_offset},
          {"drift", s.drift},
          {"drift_off_subspace", s.drift_off_subspace},
          {"normal_rank", s.normal_rank},
          {"noise", s.noise}};
}

ordered_json to_json(const CliConfig& c) {
  ordered_json run = to_json(c.run);
  ordered_json j;
  j["seed"] = c.seed;
  j["synthetic"] = to_json(c.synthetic);
  j["data"] = {{"path", c.data.path},
               {"label_column", c.data.schema.label_column},
               {"attack_class_column", c.data.schema.attack_class_column},
               {"categorical_columns", c.data.schema.categorical_columns},
               {"numeric_columns", c.data.schema.numeric_columns},
               {"ignore_columns", c.data.schema.ignore_columns},
               {"normal_labels", c.data.schema.normal_labels},
               {"fit_scope", to_string(c.data.fit_scope)}};
  for (const char* section : {"scenario", "cfe", "memory", "pseudo_labeler", "novelty"}) j[section] = run[section];
  j["run"] = run["run"];
  j["run"]["dump_scores"] = c.dump_scores;
  return j;
}

CliConfig cli_config_from_json(const json& j, CliConfig base) {
  CliConfig c = std::move(base);
  check_keys(j,
             {"seed", "synthetic", "data", "scenario", "cfe", "memory", "pseudo_labeler", "novelty", "run"},
             "config");
  read_key(j, "seed", c.seed, "config");
  if (j.contains("synthetic")) {
    const auto& s = j["synthetic"];
    check_keys(s,
               {"dim", "num_tasks", "normals_per_task", "attacks_per_task", "attack_classes_per_task",
                "normal_cluster_spread", "attack_offset", "drift", "drift_off_subspace", "normal_rank", "noise"},
               "synthetic");
    auto& y = c.synthetic;
    read_key(s, "dim", y.dim, "synthetic");
    read_key(s, "num_tasks", y.num_tasks, "synthetic");
    read_key(s, "normals_per_task", y.normals_per_task, "synthetic");
    read_key(s, "attacks_per_task", y.attacks_per_task, "synthetic");
    read_key(s, "attack_classes_per_task", y.attack_classes_per_task, "synthetic");
    read_key(s, "normal_cluster_spread", y.normal_cluster_spread, "synthetic");
    read_key(s, "attack_offset", y.attack_offset, "synthetic");
    read_key(s, "drift", y.drift, "synthetic");
    read_key(s, "drift_off_subspace", y.drift_off_subspace, "synthetic");
    read_key(s, "normal_rank", y.normal_rank, "synthetic");
    read_key(s, "noise", y.noise, "synthetic");
  }
  if (j.contains("data")) {
    const auto& s = j["data"];
    check_keys(s,
               {"path", "label_column", "attack_class_column", "categorical_columns", "numeric_columns",
                "ignore_columns", "normal_labels", "fit_scope"},
               "data");
    read_key(s, "path", c.data.path, "data");
    read_key(s, "label_column", c.data.schema.label_column, "data");
    read_key(s, "attack_class_column", c.data.schema.attack_class_column, "data");
    read_key(s, "categorical_columns", c.data.schema.categorical_columns, "data");
    read_key(s, "numeric_columns", c.data.schema.numeric_columns, "data");
    read_key(s, "ignore_columns", c.data.schema.ignore_columns, "data");
    read_key(s, "normal_labels", c.data.schema.normal_labels, "data");
    std::string scope = to_string(c.data.fit_scope);
    read_key(s, "fit_scope", scope, "data");
    c.data.fit_scope = fit_scope_from_string(scope);
  }

  json run_part = json::object();
  for (const char* section : {"scenario", "cfe", "memory", "pseudo_labeler", "novelty"}) {
    if (j.contains(section)) run_part[section] = j[section];
  }
  if (j.contains("run")) {
    json r = j["run"];
    if (!r.is_object()) throw ConfigError("run must be a JSON object");
    read_key(r, "dump_scores", c.dump_scores, "run");
    r.erase("dump_scores");
    run_part["run"] = r;
  }
  c.run = run_config_from_json(run_part, c.run);
  c.propagate_seed();
  return c;
}

CliConfig load_cli_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return cli_config_from_json(j);
}

}  // namespace acorn::cli
