#include "acorn/cli/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "acorn/csv.hpp"
#include "acorn/errors.hpp"

namespace acorn::cli {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

// First column holds the training task index, the header the test task index.
void write_score_matrix(const fs::path& path, const ScoreMatrix& r) {
  std::vector<std::string> header{"trained_on"};
  for (Eigen::Index j = 0; j < r.cols(); ++j) header.push_back("task_" + std::to_string(j));
  Matrix m(r.rows(), r.cols() + 1);
  for (Eigen::Index i = 0; i < r.rows(); ++i) m(i, 0) = static_cast<double>(i);
  m.rightCols(r.cols()) = r;
  csv::write_matrix(path, m, header);
}

ScoreMatrix read_score_matrix(const fs::path& path) {
  const Matrix full = csv::read_matrix(path);
  if (full.cols() < 2) throw DataError(path.string() + ": expected a task index column and scores");
  const Matrix m = full.rightCols(full.cols() - 1);
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw DataError(path.string() + ": expected a square score matrix, got " + std::to_string(m.rows()) + "x" +
                    std::to_string(m.cols()));
  }
  return m;
}

RunSummary summarize_results(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + ": not a directory");
  std::ifstream in(dir / "manifest.json");
  if (!in) throw DataError(dir.string() + ": missing manifest.json");
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError((dir / "manifest.json").string() + ": " + e.what());
  }
  RunSummary s;
  s.name = fs::path(dir).lexically_normal().filename().string();
  if (s.name.empty()) s.name = fs::path(dir).lexically_normal().parent_path().filename().string();
  try {
    const auto& run = manifest.at("config").at("run");
    s.baseline = run.at("baseline").get<std::string>();
    s.ablations = run.at("ablations").get<std::vector<std::string>>();
  } catch (const json::exception&) {
    throw DataError((dir / "manifest.json").string() + ": missing config.run.baseline or ablations");
  }
  const ScoreMatrix r = read_score_matrix(dir / "R.csv");
  s.tasks = static_cast<std::size_t>(r.rows());
  s.avg_f1 = avg_f1(r);
  s.fwd_transfer = fwd_transfer(r);
  s.bwd_transfer = bwd_transfer(r);
  return s;
}

void write_summary_csv(const fs::path& path, const std::vector<RunSummary>& runs) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "run,baseline,ablations,tasks,avg_f1,fwd_transfer,bwd_transfer\n";
  for (const auto& r : runs) {
    std::string abl;
    for (const auto& a : r.ablations) abl += (abl.empty() ? "" : ";") + a;
    out << r.name << ',' << r.baseline << ',' << abl << ',' << r.tasks << ',' << csv::format(r.avg_f1) << ','
        << csv::format(r.fwd_transfer) << ',' << csv::format(r.bwd_transfer) << '\n';
  }
}

void write_summary_json(const fs::path& path, const std::vector<RunSummary>& runs) {
  ordered_json list = ordered_json::array();
  for (const auto& r : runs) {
    list.push_back({{"run", r.name},
                    {"baseline", r.baseline},
                    {"ablations", r.ablations},
                    {"tasks", r.tasks},
                    {"avg_f1", r.avg_f1},
                    {"fwd_transfer", r.fwd_transfer},
                    {"bwd_transfer", r.bwd_transfer}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << list.dump(2) << '\n';
}

std::string bar_chart_svg(const std::string& title, const std::vector<Bar>& bars) {
  constexpr double bar_w = 60.0, gap = 30.0, plot_h = 200.0, top = 40.0, left = 50.0;
  double hi = 0.0, lo = 0.0;
  for (const auto& b : bars) {
    if (std::isfinite(b.value)) {
      hi = std::max(hi, b.value);
      lo = std::min(lo, b.value);
    }
  }
  if (hi - lo <= 0.0) hi = 1.0;
  const double width = left + gap + static_cast<double>(bars.size()) * (bar_w + gap);
  const double height = top + plot_h + 60.0;
  const auto y_of = [&](double v) { return top + (hi - v) / (hi - lo) * plot_h; };
  const double zero = y_of(0.0);

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(width, 0) << "\" height=\""
    << fixed(height, 0) << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "  <text x=\"" << fixed(width / 2, 1) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
    << escape_xml(title) << "</text>\n";
  s << "  <line x1=\"" << fixed(left, 1) << "\" y1=\"" << fixed(zero, 1) << "\" x2=\"" << fixed(width - 10, 1)
    << "\" y2=\"" << fixed(zero, 1) << "\" stroke=\"black\"/>\n";
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const double v = std::isfinite(bars[i].value) ? bars[i].value : 0.0;
    const double x = left + gap + static_cast<double>(i) * (bar_w + gap);
    const double y = std::min(zero, y_of(v));
    const double h = std::abs(y_of(v) - zero);
    s << "  <rect class=\"bar\" x=\"" << fixed(x, 1) << "\" y=\"" << fixed(y, 1) << "\" width=\"" << fixed(bar_w, 1)
      << "\" height=\"" << fixed(h, 1) << "\" fill=\"#4c72b0\"/>\n";
    s << "  <text x=\"" << fixed(x + bar_w / 2, 1) << "\" y=\"" << fixed(y - 4, 1)
      << "\" text-anchor=\"middle\">" << fixed(bars[i].value, 3) << "</text>\n";
    s << "  <text x=\"" << fixed(x + bar_w / 2, 1) << "\" y=\"" << fixed(top + plot_h + 20, 1)
      << "\" text-anchor=\"middle\">" << escape_xml(bars[i].label) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace acorn::cli
