// Acceptance suite: one [PASS]/[FAIL] line per criterion. Pass criterion
// numbers as arguments to run a subset. Exit status is nonzero when any
// selected criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "acorn/cli/commands.hpp"
#include "acorn/memory.hpp"
#include "acorn/metrics.hpp"
#include "acorn/novelty.hpp"
#include "acorn/pipeline.hpp"
#include "support/cases.hpp"
#include "support/oracles.hpp"
#include "support/temp_dir.hpp"

using namespace acorn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

constexpr std::uint64_t kSeeds[] = {0, 1, 2};

// ---------------------------------------------------------------------------
// 1. Exceedance rate of mu + 2 sigma.

Outcome threshold_rate() {
  const auto start = Clock::now();
  // FREs of clean rows under a PCA fit: low-rank signal plus isotropic noise
  // in 512 dimensions, so each FRE is a scaled chi-square with ~508 degrees
  // of freedom, close to Gaussian.
  constexpr Eigen::Index d = 512, rank = 4, fit_rows = 3000, val_rows = 50000, chunk = 5000;
  Rng rng = make_stream(7, "acceptance_fre");
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix mix(rank, d);
  for (Eigen::Index i = 0; i < mix.size(); ++i) mix.data()[i] = 4.0 * g(rng);
  auto draw = [&](Eigen::Index n) {
    Matrix z(n, rank), e(n, d);
    for (Eigen::Index i = 0; i < z.size(); ++i) z.data()[i] = g(rng);
    for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = 0.1 * g(rng);
    return Matrix(z * mix + e);
  };
  const PcaBasis basis = fit_pca(draw(fit_rows), 0.95);
  std::vector<double> fres;
  fres.reserve(val_rows);
  for (Eigen::Index done = 0; done < val_rows; done += chunk) {
    const Vector s = fre_score(basis, draw(chunk));
    fres.insert(fres.end(), s.data(), s.data() + s.size());
  }
  const Threshold t = calibrate_threshold(fres);
  const double rate =
      static_cast<double>(std::count_if(fres.begin(), fres.end(), [&](double s) { return s > t.tau; })) /
      static_cast<double>(fres.size());
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = std::abs(rate - 0.023) <= 0.005 && elapsed < 5.0;
  o.detail = "exceedance " + fmt(100 * rate, 2) + "% over " + std::to_string(fres.size()) + " FREs (rank " +
             std::to_string(basis.rank()) + "), " + fmt(elapsed, 2) + " s";
  return o;
}

// ---------------------------------------------------------------------------
// 2-4, 10. ENA synthetic runs shared by several criteria.

RunConfig ena_config(std::uint64_t seed) {
  RunConfig cfg;
  cfg.seed = seed;
  cfg.scenario.mode = ScenarioMode::ENA;
  cfg.scenario.num_tasks = 4;
  cfg.scenario.seed = seed;
  return cfg;
}

std::vector<TaskBundle> ena_tasks(std::uint64_t seed) {
  SyntheticSpec s;  // m=4, d=20, 2000 normals + 500 attacks per task
  s.seed = seed;
  return build_scenario(generate_synthetic(s), ena_config(seed).scenario);
}

struct Variant {
  std::string name;
  std::vector<double> avg, fwd, bwd;
  double seconds = 0.0;
  double inference_per_sample = 0.0;

  double mean(const std::vector<double>& v) const {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }
};

struct EnaRuns {
  Variant acorn, static_pca, null_detector;
  std::vector<Variant> ablations;
  bool have_ablations = false;
};

void record(Variant& v, const ScenarioResult& r, double seconds) {
  v.avg.push_back(r.avg());
  v.fwd.push_back(r.fwd());
  v.bwd.push_back(r.bwd());
  v.seconds += seconds;
  v.inference_per_sample += r.mean_inference_seconds_per_sample() / std::size(kSeeds);
}

ScoreMatrix null_detector_matrix(const std::vector<TaskBundle>& tasks) {
  const auto m = static_cast<Eigen::Index>(tasks.size());
  ScoreMatrix r(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) {
      const auto& y = tasks[static_cast<std::size_t>(j)].y_test;
      r(i, j) = f1(Labels(y.size(), 0), y);
    }
  return r;
}

EnaRuns& ena_runs(bool need_ablations) {
  static EnaRuns runs;
  static bool base_done = false;
  if (!base_done) {
    runs.acorn.name = "acorn";
    runs.static_pca.name = "static_pca (no memory)";
    runs.null_detector.name = "null";
    for (auto seed : kSeeds) {
      const auto tasks = ena_tasks(seed);
      RunConfig cfg = ena_config(seed);
      auto t = Clock::now();
      const ScenarioResult a = run_scenario(cfg, tasks);
      record(runs.acorn, a, seconds_since(t));
      std::cerr << "  seed " << seed << " acorn avg " << fmt(a.avg()) << " fwd " << fmt(a.fwd()) << " bwd "
                << fmt(a.bwd()) << "\n";

      cfg.baseline_memory = false;
      t = Clock::now();
      const ScenarioResult p = run_static_baseline(BaselineMode::static_pca, tasks, cfg);
      record(runs.static_pca, p, seconds_since(t));
      std::cerr << "  seed " << seed << " static_pca avg " << fmt(p.avg()) << " bwd " << fmt(p.bwd()) << "\n";

      const ScoreMatrix n = null_detector_matrix(tasks);
      runs.null_detector.avg.push_back(avg_f1(n));
      runs.null_detector.fwd.push_back(fwd_transfer(n));
      runs.null_detector.bwd.push_back(bwd_transfer(n));
    }
    base_done = true;
  }
  if (need_ablations && !runs.have_ablations) {
    for (const char* name : {"no_metric_loss", "no_recon_loss", "no_memories", "no_stored_pseudo_labels"}) {
      Variant v;
      v.name = name;
      for (auto seed : kSeeds) {
        const auto tasks = ena_tasks(seed);
        RunConfig cfg = ena_config(seed);
        cfg.ablations.enable(name);
        const auto t = Clock::now();
        const ScenarioResult r = run_scenario(cfg, tasks);
        record(v, r, seconds_since(t));
        std::cerr << "  seed " << seed << " " << name << " avg " << fmt(r.avg()) << "\n";
      }
      runs.ablations.push_back(v);
    }
    runs.have_ablations = true;
  }
  return runs;
}

Outcome forgetting_gap() {
  const auto start = Clock::now();
  const EnaRuns& r = ena_runs(false);
  const double elapsed = seconds_since(start);
  const double a_avg = r.acorn.mean(r.acorn.avg), p_avg = r.static_pca.mean(r.static_pca.avg);
  const double a_bwd = r.acorn.mean(r.acorn.bwd), p_bwd = r.static_pca.mean(r.static_pca.bwd);
  Outcome o;
  o.pass = a_avg - p_avg >= 0.15 && a_bwd >= -0.05 && p_bwd <= -0.15 && elapsed < 300.0;
  o.detail = "AVG acorn " + fmt(a_avg) + " vs static_pca " + fmt(p_avg) + " (gap " + fmt(a_avg - p_avg) +
             "), BwdTrans acorn " + fmt(a_bwd) + " static_pca " + fmt(p_bwd) + ", " + fmt(elapsed, 1) + " s";
  return o;
}

Outcome zero_day() {
  const EnaRuns& r = ena_runs(false);
  const double a = r.acorn.mean(r.acorn.fwd), n = r.null_detector.mean(r.null_detector.fwd);
  std::string per_seed;
  for (double v : r.acorn.fwd) per_seed += (per_seed.empty() ? "" : "/") + fmt(v, 3);
  Outcome o;
  o.pass = a >= 0.5 && n == 0.0;
  o.detail = "FwdTrans acorn " + fmt(a) + " (seeds " + per_seed + "), null detector " + fmt(n);
  return o;
}

Outcome ablation_order() {
  const EnaRuns& r = ena_runs(true);
  const double full = r.acorn.mean(r.acorn.avg);
  Outcome o;
  o.pass = true;
  o.detail = "full " + fmt(full);
  for (const auto& v : r.ablations) {
    const double m = v.mean(v.avg);
    o.detail += ", " + v.name + " " + fmt(m);
    if (m > full) o.pass = false;
    if ((v.name == "no_memories" || v.name == "no_stored_pseudo_labels") && full - m < 0.05) o.pass = false;
  }
  return o;
}

Outcome throughput() {
  const EnaRuns& r = ena_runs(false);
  const double a = r.acorn.inference_per_sample, p = r.static_pca.inference_per_sample;
  Outcome o;
  o.pass = a <= 10.0 * p;
  o.detail = "per-sample inference acorn " + fmt(a * 1e6, 3) + " us, static_pca " + fmt(p * 1e6, 3) +
             " us, ratio " + fmt(a / p, 1);
  return o;
}

// ---------------------------------------------------------------------------
// 5. Gradient oracle.

Outcome gradients() {
  const auto start = Clock::now();
  constexpr std::uint64_t n = 40;
  double worst = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto c = cases::gradient_case(i);
    worst = std::max(worst, oracle::check_gradient(c.params, c.x, c.triplets, c.loss).relative_error);
  }
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = worst <= 1e-4 && elapsed < 30.0;
  o.detail = std::to_string(n) + " configurations, worst relative error " + sci(worst) + ", " +
             fmt(elapsed, 2) + " s";
  return o;
}

// ---------------------------------------------------------------------------
// 6. Reservoir uniformity.

Outcome reservoir() {
  constexpr std::size_t capacity = 10, n = 10000, trials = 5000;
  LabeledRows stream;
  stream.rows.resize(static_cast<Eigen::Index>(n), 1);
  for (std::size_t i = 0; i < n; ++i) stream.rows(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
  stream.labels.assign(n, 0);
  std::vector<double> counts(n, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    ReservoirBuffer buf(capacity, make_stream(2718, "acceptance_reservoir", t));
    buf.offer_all(stream);
    const LabeledRows snap = buf.snapshot();
    for (Eigen::Index i = 0; i < snap.rows.rows(); ++i) counts[static_cast<std::size_t>(snap.rows(i, 0))] += 1;
  }
  const double expected = static_cast<double>(trials * capacity) / static_cast<double>(n);
  double chi = 0;
  for (double c : counts) chi += (c - expected) * (c - expected) / expected;
  const double critical = oracle::chi_square_critical(static_cast<double>(n - 1), 2.3263478740408408);
  Outcome o;
  o.pass = chi < critical;
  o.detail = "chi2 " + fmt(chi, 1) + " vs critical " + fmt(critical, 1) + " (dof " + std::to_string(n - 1) + ")";
  return o;
}

// ---------------------------------------------------------------------------
// 7. PCA / FRE oracle.

Outcome pca_oracle() {
  Rng rng = make_stream(31, "acceptance_pca");
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  std::size_t rank_mismatch = 0;
  constexpr int trials = 100;
  for (int trial = 0; trial < trials; ++trial) {
    const auto n = std::uniform_int_distribution<Eigen::Index>(10, 200)(rng);
    const auto d = std::uniform_int_distribution<Eigen::Index>(2, 16)(rng);
    const auto k = std::uniform_int_distribution<Eigen::Index>(1, d)(rng);
    const double noise = std::uniform_real_distribution<double>(0.01, 0.5)(rng);
    Matrix z(n, k), mix(k, d), e(n, d), probe(25, d);
    for (auto* m : {&z, &mix, &e, &probe})
      for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = g(rng);
    const Matrix x = z * mix + noise * e;
    const PcaBasis b = fit_pca(x, 0.95);
    const oracle::Pca ref = oracle::pca(x, 0.95);
    rank_mismatch += b.rank() != ref.rank;
    const Vector got = fre_score(b, probe);
    const Eigen::VectorXd want = oracle::affine_distance(ref, probe);
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
  }
  Outcome o;
  o.pass = worst <= 1e-8 && rank_mismatch == 0;
  o.detail = std::to_string(trials) + " matrices, max |FRE - oracle| " + sci(worst) + ", rank mismatches " +
             std::to_string(rank_mismatch);
  return o;
}

// ---------------------------------------------------------------------------
// 8. Metrics oracle.

Outcome metrics_oracle() {
  Rng rng = make_stream(41, "acceptance_metrics");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = std::uniform_int_distribution<int>(1, 6)(rng);
    ScoreMatrix r(m, m);
    for (Eigen::Index i = 0; i < r.size(); ++i) r.data()[i] = u(rng);
    worst = std::max({worst, std::abs(avg_f1(r) - oracle::avg(r)), std::abs(fwd_transfer(r) - oracle::fwd(r)),
                      std::abs(bwd_transfer(r) - oracle::bwd(r))});
  }
  std::size_t ap_mismatch = 0, ap_checked = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = std::uniform_int_distribution<int>(1, 12)(rng);
    std::vector<double> s(static_cast<std::size_t>(n));
    std::vector<int> y(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < s.size(); ++i) {
      s[i] = std::uniform_int_distribution<int>(0, 6)(rng) * 0.125;
      y[i] = std::uniform_int_distribution<int>(0, 1)(rng);
    }
    if (std::count(y.begin(), y.end(), 1) == 0) continue;
    ++ap_checked;
    ap_mismatch += pr_auc(s, y) != oracle::average_precision(s, y);
  }
  Outcome o;
  o.pass = worst <= 1e-12 && ap_mismatch == 0;
  o.detail = "100 matrices, max aggregate error " + sci(worst) + "; pr_auc exact on " +
             std::to_string(ap_checked - ap_mismatch) + "/" + std::to_string(ap_checked) + " vectors";
  return o;
}

// ---------------------------------------------------------------------------
// 9. Determinism of the run command.

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "acorn");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run_cli(static_cast<int>(argv.size()), argv.data());
}

Outcome determinism() {
  testing_support::TempDir dir;
  // The acceptance ENA scenario with a shorter training schedule.
  const auto cfg = dir.write("config.json", R"({"seed": 5, "cfe": {"epochs": 3}})");
  const int a = cli({"run", "--config", cfg.string(), "--out", (dir / "a").string()});
  const int b = cli({"run", "--config", cfg.string(), "--out", (dir / "b").string()});
  Outcome o;
  if (a != 0 || b != 0) {
    o.detail = "run exited with " + std::to_string(a) + "/" + std::to_string(b);
    return o;
  }
  using testing_support::read_file;
  const bool r_same = read_file(dir / "a/R.csv") == read_file(dir / "b/R.csv");
  const bool m_same = read_file(dir / "a/manifest.json") == read_file(dir / "b/manifest.json");
  const bool p_same = read_file(dir / "a/prauc.csv") == read_file(dir / "b/prauc.csv");
  o.pass = r_same && m_same;
  o.detail = std::string("R.csv ") + (r_same ? "identical" : "differs") + ", manifest.json " +
             (m_same ? "identical" : "differs") + ", prauc.csv " + (p_same ? "identical" : "differs");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"threshold exceedance near 2.3%", threshold_rate},
      {"forgetting gap vs memory-less static PCA", forgetting_gap},
      {"zero-day FwdTrans", zero_day},
      {"ablation ordering", ablation_order},
      {"gradient oracle", gradients},
      {"reservoir uniformity", reservoir},
      {"PCA/FRE oracle", pca_oracle},
      {"metrics oracle", metrics_oracle},
      {"run determinism", determinism},
      {"inference throughput vs static PCA", throughput},
  };
  std::set<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.insert(static_cast<std::size_t>(std::stoul(argv[i])));

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const std::size_t id = i + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failures += !o.pass;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << id << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
