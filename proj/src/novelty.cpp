#include "acorn/novelty.hpp"

#include <cmath>

#include "acorn/errors.hpp"
#include "acorn/kernels.hpp"

namespace acorn {

nlohmann::json PcaBasis::summary() const {
  return {{"rank", rank()}, {"dim", dim()}, {"explained_variance_ratio", explained_variance_ratio}};
}

PcaBasis fit_pca(const Matrix& h, double variance_target) {
  if (h.rows() < 2) throw DataError("fit_pca needs at least 2 rows, got " + std::to_string(h.rows()));
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw ConfigError("PCA variance target must lie in (0,1]");
  }
  PcaBasis basis;
  // Shifted mean: identical rows give an exact zero residual.
  const RowVector first = h.row(0);
  basis.mean = first + (h.rowwise() - first).colwise().mean();
  const Matrix centered = h.rowwise() - basis.mean;

  Eigen::BDCSVD<Matrix> svd(centered, Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  const Vector var = sv.array().square();
  const double total = var.sum();
  basis.components.resize(0, h.cols());
  if (!(total > 0.0)) return basis;

  const Eigen::Index full_rank = svd.rank();
  Eigen::Index r = 0;
  double cumulative = 0.0;
  while (r < full_rank) {
    cumulative += var(r) / total;
    basis.explained_variance_ratio.push_back(var(r) / total);
    ++r;
    if (cumulative >= variance_target) break;
  }
  basis.components = svd.matrixV().leftCols(r).transpose();
  return basis;
}

Vector fre_score(const PcaBasis& basis, const Matrix& h) {
  if (static_cast<std::size_t>(h.cols()) != basis.dim()) {
    throw DataError("fre_score: expected " + std::to_string(basis.dim()) + " columns, got " +
                    std::to_string(h.cols()));
  }
  return kernels::subspace_residuals(h, basis.mean, basis.components);
}

Threshold calibrate_threshold(std::span<const double> validation_scores) {
  if (validation_scores.empty()) throw DataError("calibrate_threshold: no validation scores");
  const auto n = static_cast<double>(validation_scores.size());
  double mean = 0.0;
  for (double s : validation_scores) mean += s;
  mean /= n;
  double ss = 0.0;
  for (double s : validation_scores) ss += (s - mean) * (s - mean);
  Threshold t;
  t.mean = mean;
  t.stddev = std::sqrt(ss / n);
  t.tau = t.mean + 2.0 * t.stddev;
  return t;
}

Labels classify(std::span<const double> scores, double tau) {
  Labels out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(s > tau ? 1 : 0);
  return out;
}

}  // namespace acorn
