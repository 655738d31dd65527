#include <gtest/gtest.h>

#include "acorn/errors.hpp"
#include "acorn/pipeline.hpp"

using namespace acorn;

namespace {

SyntheticSpec small_synthetic(std::size_t tasks, std::uint64_t seed) {
  SyntheticSpec s;
  s.dim = 8;
  s.num_tasks = tasks;
  s.normals_per_task = 400;
  s.attacks_per_task = 100;
  s.seed = seed;
  return s;
}

RunConfig small_config(std::size_t tasks, std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.scenario.num_tasks = tasks;
  cfg.scenario.seed = seed;
  cfg.cfe.hidden = {32, 16};
  cfg.cfe.epochs = 5;
  cfg.cfe.batch_size = 64;
  cfg.pseudo_labeler.k_max = 8;
  return cfg;
}

std::vector<TaskBundle> tasks_for(const SyntheticSpec& s, const RunConfig& cfg) {
  return build_scenario(generate_synthetic(s), cfg.scenario);
}

}  // namespace

TEST(Pipeline, SingleSeparableTaskIsPerfect) {
  SyntheticSpec s = small_synthetic(1, 3);
  s.attack_offset = 10.0;
  RunConfig cfg = small_config(1, 3);
  const auto tasks = tasks_for(s, cfg);
  const ScenarioResult r = run_scenario(cfg, tasks);
  ASSERT_EQ(r.f1.rows(), 1);
  // Separation check: every attack scores above every normal.
  const auto& ev = r.tasks[0].evaluations[0];
  double max_normal = 0, min_attack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tasks[0].y_test.size(); ++i) {
    const double v = ev.scores(static_cast<Eigen::Index>(i));
    if (tasks[0].y_test[i]) min_attack = std::min(min_attack, v);
    else max_normal = std::max(max_normal, v);
  }
  EXPECT_LT(max_normal, min_attack);
  EXPECT_NEAR(r.pr_auc(0, 0), 1.0, 1e-12);
  // With separated scores every miss is a normal row above tau, which the
  // mean + 2 sd rule lets through for a few percent of normals.
  const double tau = r.tasks[0].threshold.tau;
  EXPECT_LT(tau, min_attack);
  std::size_t fp = 0, attacks = 0;
  for (std::size_t i = 0; i < tasks[0].y_test.size(); ++i) {
    attacks += tasks[0].y_test[i];
    fp += !tasks[0].y_test[i] && ev.scores(static_cast<Eigen::Index>(i)) > tau;
  }
  EXPECT_DOUBLE_EQ(r.f1(0, 0), 2.0 * attacks / (2.0 * attacks + fp));
  EXPECT_LE(fp, tasks[0].y_test.size() / 20);
}

TEST(Pipeline, NoMemoriesMatchesFullOnFirstTask) {
  const RunConfig cfg = small_config(1, 4);
  RunConfig ablated = cfg;
  ablated.ablations.no_memories = true;
  const auto tasks = tasks_for(small_synthetic(1, 4), cfg);
  const ScenarioResult a = run_scenario(cfg, tasks), b = run_scenario(ablated, tasks);
  EXPECT_EQ(a.f1, b.f1);
  EXPECT_EQ(a.tasks[0].evaluations[0].scores, b.tasks[0].evaluations[0].scores);
}

TEST(Pipeline, ShapesDeterminismAndManifest) {
  const RunConfig cfg = small_config(2, 5);
  const auto tasks = tasks_for(small_synthetic(2, 5), cfg);
  const ScenarioResult a = run_scenario(cfg, tasks);
  ASSERT_EQ(a.f1.rows(), 2);
  ASSERT_EQ(a.f1.cols(), 2);
  for (const auto& t : a.tasks) EXPECT_EQ(t.evaluations.size(), 2u);
  EXPECT_GT(a.tasks[1].normal_memory_seen, a.tasks[0].normal_memory_seen);
  EXPECT_GT(a.tasks[1].train_memory_seen, a.tasks[0].train_memory_seen);
  EXPECT_GE(a.tasks[0].k, cfg.pseudo_labeler.k_min);
  const ScenarioResult b = run_scenario(cfg, tasks);
  EXPECT_EQ(a.f1, b.f1);
  EXPECT_EQ(run_manifest(cfg, a).dump(), run_manifest(cfg, b).dump());
  const auto m = run_manifest(cfg, a);
  EXPECT_TRUE(m.contains("config"));
  EXPECT_EQ(m["tasks"].size(), 2u);
  for (Eigen::Index i = 0; i < a.f1.size(); ++i) {
    EXPECT_GE(a.f1.data()[i], 0.0);
    EXPECT_LE(a.f1.data()[i], 1.0);
  }
}

TEST(Pipeline, ScoringDoesNotMutateState) {
  const RunConfig cfg = small_config(1, 6);
  const auto tasks = tasks_for(small_synthetic(1, 6), cfg);
  PipelineState state(cfg);
  run_task(state, tasks, cfg);
  const std::string before = state.cfe->to_json().dump();
  const Vector s1 = score_rows(state, cfg, tasks[0].x_test);
  const Vector s2 = score_rows(state, cfg, tasks[0].x_test);
  EXPECT_EQ(s1, s2);
  EXPECT_EQ(state.cfe->to_json().dump(), before);
}

TEST(Pipeline, StaticPcaSkipsTheEncoder) {
  RunConfig cfg = small_config(2, 7);
  const auto tasks = tasks_for(small_synthetic(2, 7), cfg);
  const ScenarioResult r = run_static_baseline(BaselineMode::static_pca, tasks, cfg);
  EXPECT_EQ(r.f1.rows(), 2);
  EXPECT_EQ(r.tasks[0].k, 0u);
  EXPECT_TRUE(r.tasks[0].loss_trace.empty());
  // The first basis is fit on the first task's clean rows in raw feature space.
  cfg.baseline = BaselineMode::static_pca;
  PipelineState state(cfg);
  run_task(state, tasks, cfg);
  EXPECT_FALSE(state.cfe.has_value());
  EXPECT_EQ(state.novelty->basis.dim(), tasks[0].dim());
}

TEST(Pipeline, StaticAeSeparatesFarAttacks) {
  SyntheticSpec s = small_synthetic(1, 8);
  s.attack_offset = 10.0;
  RunConfig cfg = small_config(1, 8);
  cfg.cfe.epochs = 30;
  const auto tasks = tasks_for(s, cfg);
  const ScenarioResult r = run_static_baseline(BaselineMode::static_ae, tasks, cfg);
  EXPECT_NEAR(r.pr_auc(0, 0), 1.0, 1e-12);
}

TEST(Pipeline, StaticPcaWithoutMemoryForgetsUnderDrift) {
  RunConfig cfg = small_config(3, 9);
  cfg.baseline_memory = false;
  const auto tasks = tasks_for(small_synthetic(3, 9), cfg);
  const ScenarioResult r = run_static_baseline(BaselineMode::static_pca, tasks, cfg);
  // After the last task, the first task's normals are out of distribution.
  EXPECT_LT(r.f1(2, 0), r.f1(0, 0));
  EXPECT_LT(r.bwd(), 0.0);
}

TEST(Pipeline, StaticPcaIsStableOnStationaryNormals) {
  RunConfig cfg = small_config(3, 10);
  cfg.scenario.mode = ScenarioMode::EA;
  const auto tasks = tasks_for(small_synthetic(3, 10), cfg);
  const ScenarioResult r = run_static_baseline(BaselineMode::static_pca, tasks, cfg);
  for (Eigen::Index j = 0; j < 3; ++j) {
    EXPECT_NEAR(r.f1(2, j), r.f1(0, j), 0.1) << "column " << j;
  }
}

TEST(RunConfig, ValidationErrors) {
  RunConfig ok = small_config(2, 0);
  EXPECT_NO_THROW(ok.validate());
  auto bad = [&](auto mutate) {
    RunConfig c = ok;
    mutate(c);
    EXPECT_THROW(c.validate(), ConfigError);
  };
  bad([](RunConfig& c) { c.ablations.no_metric_loss = c.ablations.no_recon_loss = true; });
  bad([](RunConfig& c) {
    c.baseline = BaselineMode::static_pca;
    c.ablations.no_memories = true;
  });
  bad([](RunConfig& c) { c.cfe.hidden = {}; });
  bad([](RunConfig& c) { c.cfe.hidden = {4, 0}; });
  bad([](RunConfig& c) { c.cfe.margin = 0; });
  bad([](RunConfig& c) { c.pseudo_labeler.k_min = 5, c.pseudo_labeler.k_max = 5; });
  bad([](RunConfig& c) { c.novelty.validation_fraction = 1.0; });
  bad([](RunConfig& c) { c.novelty.variance_target = 0.0; });
  bad([](RunConfig& c) { c.scenario.num_tasks = 0; });
  Ablations a;
  EXPECT_THROW(a.enable("no_such_switch"), ConfigError);
  a.enable("no_memories");
  EXPECT_EQ(a.names(), std::vector<std::string>{"no_memories"});
}

TEST(RunConfig, JsonRoundTripAndStrictness) {
  RunConfig c = small_config(3, 11);
  c.ablations.no_recon_loss = true;
  c.cfe.squared_distance = true;
  const auto j = to_json(c);
  const RunConfig back = run_config_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(to_json(back).dump(), j.dump());
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"cfe": {"epochz": 3}})")), ConfigError);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"bogus": 1})")), ConfigError);
  EXPECT_THROW(run_config_from_json(nlohmann::json::parse(R"({"cfe": {"epochs": "many"}})")), ConfigError);
  const RunConfig partial = run_config_from_json(nlohmann::json::parse(R"({"cfe": {"epochs": 3}})"), c);
  EXPECT_EQ(partial.cfe.epochs, 3u);
  EXPECT_EQ(partial.cfe.hidden, c.cfe.hidden);
}

TEST(Pipeline, FailuresNameTheTask) {
  RunConfig cfg = small_config(1, 12);
  auto tasks = tasks_for(small_synthetic(1, 12), cfg);
  tasks[0].x_train(0, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    run_scenario(cfg, tasks);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("task 0"), std::string::npos) << e.what();
  }
}
