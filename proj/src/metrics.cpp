#include "acorn/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "acorn/errors.hpp"

namespace acorn {
namespace {

void check_square(const ScoreMatrix& r) {
  if (r.rows() == 0 || r.rows() != r.cols()) throw DataError("score matrix must be square and non-empty");
}

}  // namespace

double f1(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) throw DataError("f1: length mismatch");
  if (labels.empty()) throw DataError("f1: empty input");
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predictions[i] != 0;
    const bool y = labels[i] != 0;
    tp += p && y;
    fp += p && !y;
    fn += !p && y;
  }
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom > 0.0 ? 2.0 * static_cast<double>(tp) / denom : 0.0;
}

double avg_f1(const ScoreMatrix& r) {
  check_square(r);
  return r.row(r.rows() - 1).mean();
}

double fwd_transfer(const ScoreMatrix& r) {
  check_square(r);
  const Eigen::Index m = r.rows();
  if (m < 2) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) sum += r(i, j);
  return sum / (static_cast<double>(m * (m - 1)) / 2.0);
}

double bwd_transfer(const ScoreMatrix& r) {
  check_square(r);
  const Eigen::Index m = r.rows();
  if (m < 2) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) sum += r(m - 1, i) - r(i, i);
  return sum / (static_cast<double>(m * (m - 1)) / 2.0);
}

double pr_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DataError("pr_auc: length mismatch");
  const auto positives = static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(), [](int y) { return y != 0; }));
  if (positives == 0) throw DataError("pr_auc: no positive labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double ap = 0.0;
  std::size_t tp = 0, seen = 0, prev_tp = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double cut = scores[order[k]];
    while (k < order.size() && scores[order[k]] == cut) {
      tp += labels[order[k]] != 0;
      ++seen;
      ++k;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += precision * static_cast<double>(tp - prev_tp) / static_cast<double>(positives);
    prev_tp = tp;
  }
  return ap;
}

}  // namespace acorn
