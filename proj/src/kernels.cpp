#include "acorn/kernels.hpp"

#include <limits>
#include <stdexcept>

#include <omp.h>

namespace acorn::kernels {
namespace {

Eigen::Index chunk_count(Eigen::Index rows) { return (rows + kRowChunk - 1) / kRowChunk; }

void check_affine(const Matrix& x, const Matrix& weights, const RowVector& bias) {
  if (x.cols() != weights.rows() || bias.size() != weights.cols()) {
    throw std::invalid_argument("affine: shape mismatch");
  }
}

// Shared by both variants so that tie-breaking and rounding agree exactly.
void nearest_row(const Matrix& x, const Matrix& centers, Eigen::Index i, std::size_t& best,
                 double& best_d) {
  best = 0;
  best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double diff = x(i, j) - centers(c, j);
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = static_cast<std::size_t>(c);
    }
  }
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void affine(const Matrix& x, const Matrix& weights, const RowVector& bias, Matrix& y) {
  check_affine(x, weights, bias);
  y.resize(x.rows(), weights.cols());
  const Eigen::Index chunks = chunk_count(x.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index begin = c * kRowChunk;
    const Eigen::Index len = std::min(kRowChunk, x.rows() - begin);
    y.middleRows(begin, len).noalias() = x.middleRows(begin, len) * weights;
    y.middleRows(begin, len).rowwise() += bias;
  }
}

NearestCenter nearest_centers(const Matrix& x, const Matrix& centers) {
  if (centers.rows() == 0 || x.cols() != centers.cols()) {
    throw std::invalid_argument("nearest_centers: shape mismatch");
  }
  NearestCenter out;
  out.index.resize(static_cast<std::size_t>(x.rows()));
  out.sq_distance.resize(static_cast<std::size_t>(x.rows()));
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    nearest_row(x, centers, i, out.index[static_cast<std::size_t>(i)],
                out.sq_distance[static_cast<std::size_t>(i)]);
  }
  return out;
}

Vector subspace_residuals(const Matrix& h, const RowVector& mean, const Matrix& components) {
  if (h.cols() != mean.size() || (components.rows() > 0 && components.cols() != h.cols())) {
    throw std::invalid_argument("subspace_residuals: shape mismatch");
  }
  Vector out(h.rows());
  const Eigen::Index chunks = chunk_count(h.rows());
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < chunks; ++c) {
    const Eigen::Index begin = c * kRowChunk;
    const Eigen::Index len = std::min(kRowChunk, h.rows() - begin);
    Matrix centered = h.middleRows(begin, len).rowwise() - mean;
    if (components.rows() > 0) {
      const Matrix coords = centered * components.transpose();
      centered.noalias() -= coords * components;
    }
    out.segment(begin, len) = centered.rowwise().squaredNorm();
  }
  return out;
}

Vector row_mse(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("row_mse: shape mismatch");
  }
  Vector out(a.rows());
  const double inv = a.cols() > 0 ? 1.0 / static_cast<double>(a.cols()) : 0.0;
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    out(i) = (a.row(i) - b.row(i)).squaredNorm() * inv;
  }
  return out;
}

namespace serial {

void affine(const Matrix& x, const Matrix& weights, const RowVector& bias, Matrix& y) {
  check_affine(x, weights, bias);
  y.resize(x.rows(), weights.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index o = 0; o < weights.cols(); ++o) {
      double acc = bias(o);
      for (Eigen::Index k = 0; k < x.cols(); ++k) acc += x(i, k) * weights(k, o);
      y(i, o) = acc;
    }
  }
}

NearestCenter nearest_centers(const Matrix& x, const Matrix& centers) {
  if (centers.rows() == 0 || x.cols() != centers.cols()) {
    throw std::invalid_argument("nearest_centers: shape mismatch");
  }
  NearestCenter out;
  out.index.resize(static_cast<std::size_t>(x.rows()));
  out.sq_distance.resize(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    nearest_row(x, centers, i, out.index[static_cast<std::size_t>(i)],
                out.sq_distance[static_cast<std::size_t>(i)]);
  }
  return out;
}

Vector subspace_residuals(const Matrix& h, const RowVector& mean, const Matrix& components) {
  if (h.cols() != mean.size() || (components.rows() > 0 && components.cols() != h.cols())) {
    throw std::invalid_argument("subspace_residuals: shape mismatch");
  }
  const Eigen::Index p = h.cols();
  Vector out(h.rows());
  std::vector<double> centered(static_cast<std::size_t>(p));
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index j = 0; j < p; ++j) centered[j] = h(i, j) - mean(j);
    std::vector<double> residual = centered;
    for (Eigen::Index r = 0; r < components.rows(); ++r) {
      double coord = 0.0;
      for (Eigen::Index j = 0; j < p; ++j) coord += centered[j] * components(r, j);
      for (Eigen::Index j = 0; j < p; ++j) residual[j] -= coord * components(r, j);
    }
    double s = 0.0;
    for (double v : residual) s += v * v;
    out(i) = s;
  }
  return out;
}

Vector row_mse(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("row_mse: shape mismatch");
  }
  Vector out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      const double d = a(i, j) - b(i, j);
      s += d * d;
    }
    out(i) = a.cols() > 0 ? s / static_cast<double>(a.cols()) : 0.0;
  }
  return out;
}

}  // namespace serial

}  // namespace acorn::kernels
