#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "acorn/metrics.hpp"

namespace acorn::cli {

struct RunSummary {
  std::string name;  // results directory name
  std::string baseline;
  std::vector<std::string> ablations;
  std::size_t tasks = 0;
  double avg_f1 = 0.0;
  double fwd_transfer = 0.0;
  double bwd_transfer = 0.0;
};

// Reads manifest.json and R.csv; metrics are recomputed from R.csv.
RunSummary summarize_results(const std::filesystem::path& dir);

void write_summary_csv(const std::filesystem::path& path, const std::vector<RunSummary>& runs);
void write_summary_json(const std::filesystem::path& path, const std::vector<RunSummary>& runs);

struct Bar {
  std::string label;
  double value = 0.0;
};
// One bar per entry; negative values hang below the zero line.
std::string bar_chart_svg(const std::string& title, const std::vector<Bar>& bars);

ScoreMatrix read_score_matrix(const std::filesystem::path& path);
void write_score_matrix(const std::filesystem::path& path, const ScoreMatrix& r);

}  // namespace acorn::cli
