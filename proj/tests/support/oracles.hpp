#pragma once

// Independent reference computations used by the unit and acceptance tests.
// They favour brute force over speed and share no code with the library
// beyond the data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "acorn/cfe.hpp"
#include "acorn/matrix.hpp"

namespace oracle {

using acorn::Matrix;

// Average precision by enumerating every distinct score as a cut point and
// counting the rows at or above it from scratch.
inline double average_precision(std::span<const double> scores, std::span<const int> labels) {
  std::set<double, std::greater<>> cuts(scores.begin(), scores.end());
  std::size_t positives = 0;
  for (int y : labels) positives += y != 0;
  double ap = 0.0;
  std::size_t prev_tp = 0;
  for (double cut : cuts) {
    std::size_t tp = 0, predicted = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= cut) {
        ++predicted;
        tp += labels[i] != 0;
      }
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(predicted);
    ap += precision * static_cast<double>(tp - prev_tp) / static_cast<double>(positives);
    prev_tp = tp;
  }
  return ap;
}

// Same quantity in exact rational arithmetic, returned as num/den.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  Fraction& operator+=(const Fraction& o) {
    num = num * o.den + o.num * den;
    den *= o.den;
    const std::int64_t g = std::gcd(num, den);
    num /= g;
    den /= g;
    return *this;
  }
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Fraction average_precision_exact(std::span<const double> scores, std::span<const int> labels) {
  std::set<double, std::greater<>> cuts(scores.begin(), scores.end());
  std::int64_t positives = 0;
  for (int y : labels) positives += y != 0;
  Fraction ap;
  std::int64_t prev_tp = 0;
  for (double cut : cuts) {
    std::int64_t tp = 0, predicted = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= cut) {
        ++predicted;
        tp += labels[i] != 0;
      }
    }
    ap += Fraction{tp * (tp - prev_tp), predicted * positives};
    prev_tp = tp;
  }
  return ap;
}

inline double f1(std::span<const int> pred, std::span<const int> y) {
  double tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    tp += pred[i] == 1 && y[i] == 1;
    fp += pred[i] == 1 && y[i] == 0;
    fn += pred[i] == 0 && y[i] == 1;
  }
  return tp + fp + fn == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
}

// Continual-learning summaries written out cell by cell.
inline double avg(const Eigen::MatrixXd& r) {
  const auto m = r.rows();
  double s = 0;
  for (Eigen::Index j = 0; j < m; ++j) s += r(m - 1, j);
  return s / static_cast<double>(m);
}

inline double fwd(const Eigen::MatrixXd& r) {
  const auto m = r.rows();
  if (m < 2) return 0.0;
  double s = 0;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i + 1; j < m; ++j) s += r(i, j);
  return s / (static_cast<double>(m * (m - 1)) / 2.0);
}

inline double bwd(const Eigen::MatrixXd& r) {
  const auto m = r.rows();
  if (m < 2) return 0.0;
  double s = 0;
  for (Eigen::Index i = 0; i < m; ++i) s += r(m - 1, i) - r(i, i);
  return s / (static_cast<double>(m * (m - 1)) / 2.0);
}

// PCA from an explicit covariance eigendecomposition.
struct Pca {
  Eigen::RowVectorXd mean;
  Eigen::MatrixXd basis;  // p x r, orthonormal columns
  std::size_t rank = 0;
};

inline Pca pca(const Matrix& x, double target) {
  Pca out;
  const auto n = x.rows();
  out.mean = x.colwise().mean();
  const Eigen::MatrixXd c = x.rowwise() - out.mean;
  const Eigen::MatrixXd cov = (c.transpose() * c) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const Eigen::VectorXd ev = es.eigenvalues().reverse().cwiseMax(0.0);
  const Eigen::MatrixXd vecs = es.eigenvectors().rowwise().reverse();
  const double total = ev.sum();
  std::size_t r = 0;
  if (total > 0) {
    double acc = 0;
    while (r < static_cast<std::size_t>(ev.size())) {
      acc += ev(static_cast<Eigen::Index>(r));
      ++r;
      if (acc / total >= target) break;
    }
  }
  out.rank = r;
  out.basis = vecs.leftCols(static_cast<Eigen::Index>(r));
  return out;
}

// Cumulative explained-variance ratios, largest eigenvalue first.
inline std::vector<double> cumulative_ratios(const Matrix& x) {
  const Eigen::MatrixXd c = x.rowwise() - x.colwise().mean();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.transpose() * c);
  const Eigen::VectorXd ev = es.eigenvalues().reverse().cwiseMax(0.0);
  std::vector<double> out;
  double acc = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    acc += ev(i);
    out.push_back(acc / ev.sum());
  }
  return out;
}

// Squared distance from each row to the affine span mean + span(basis).
inline Eigen::VectorXd affine_distance(const Pca& p, const Matrix& h) {
  Eigen::VectorXd out(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    const Eigen::VectorXd v = (h.row(i) - p.mean).transpose();
    const Eigen::VectorXd proj = p.basis * (p.basis.transpose() * v);
    out(i) = (v - proj).squaredNorm();
  }
  return out;
}

// Minimum within-cluster sum of squares over every assignment of the rows to
// exactly k non-empty clusters. Exponential; only for a handful of rows.
inline double optimal_inertia(const Matrix& x, std::size_t k) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<std::size_t> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    // Canonical labelings only: label[i] <= 1 + max(label[0..i)).
    bool canonical = true;
    std::size_t mx = 0;
    for (std::size_t i = 0; i < n && canonical; ++i) {
      if (i == 0 ? label[i] != 0 : label[i] > mx + 1) canonical = false;
      mx = std::max(mx, label[i]);
    }
    if (canonical && mx + 1 == k) {
      double inertia = 0;
      for (std::size_t c = 0; c < k; ++c) {
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(x.cols());
        double count = 0;
        for (std::size_t i = 0; i < n; ++i)
          if (label[i] == c) {
            sum += x.row(static_cast<Eigen::Index>(i));
            ++count;
          }
        const Eigen::RowVectorXd centre = sum / count;
        for (std::size_t i = 0; i < n; ++i)
          if (label[i] == c) inertia += (x.row(static_cast<Eigen::Index>(i)) - centre).squaredNorm();
      }
      best = std::min(best, inertia);
    }
    std::size_t pos = 0;
    while (pos < n && ++label[pos] == k) label[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

// Plain Lloyd iterations from the given starting centres.
inline std::vector<std::size_t> lloyd(const Matrix& x, Matrix centres, int iterations = 100) {
  std::vector<std::size_t> assign(static_cast<std::size_t>(x.rows()), 0);
  for (int it = 0; it < iterations; ++it) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < centres.rows(); ++c) {
        const double d = (x.row(i) - centres.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          assign[static_cast<std::size_t>(i)] = static_cast<std::size_t>(c);
        }
      }
    }
    for (Eigen::Index c = 0; c < centres.rows(); ++c) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(x.cols());
      double count = 0;
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        if (assign[static_cast<std::size_t>(i)] == static_cast<std::size_t>(c)) {
          sum += x.row(i);
          ++count;
        }
      if (count > 0) centres.row(c) = sum / count;
    }
  }
  return assign;
}

// Upper-tail chi-square critical value (Wilson-Hilferty); z is the standard
// normal quantile of 1 - alpha.
inline double chi_square_critical(double dof, double z) {
  const double a = 2.0 / (9.0 * dof);
  return dof * std::pow(1.0 - a + z * std::sqrt(a), 3.0);
}

// Flattened view over every trainable scalar of an autoencoder.
inline std::vector<double*> parameters(acorn::EncoderDecoderParams& p) {
  std::vector<double*> out;
  for (acorn::Mlp* net : {&p.encoder, &p.decoder}) {
    for (auto& layer : net->layers) {
      for (Eigen::Index i = 0; i < layer.weights.size(); ++i) out.push_back(layer.weights.data() + i);
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) out.push_back(layer.bias.data() + i);
    }
  }
  return out;
}

struct GradientCheck {
  double relative_error = 0.0;  // ||analytic - numeric|| / max(||analytic||, ||numeric||)
  double analytic_norm = 0.0;
  double numeric_norm = 0.0;
};

// Central differences of cfe_loss(...).total with step h.
inline GradientCheck check_gradient(acorn::EncoderDecoderParams p, const Matrix& x,
                                    const acorn::TripletBatch& triplets, const acorn::LossConfig& cfg,
                                    double h = 1e-6) {
  acorn::EncoderDecoderParams grad = p.zeros_like();
  acorn::cfe_loss(p, x, triplets, cfg, &grad);
  std::vector<double*> params = parameters(p);
  std::vector<double*> g = parameters(grad);
  double diff = 0, na = 0, nn = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i];
    *params[i] = saved + h;
    const double up = acorn::cfe_loss(p, x, triplets, cfg, nullptr).total;
    *params[i] = saved - h;
    const double down = acorn::cfe_loss(p, x, triplets, cfg, nullptr).total;
    *params[i] = saved;
    const double numeric = (up - down) / (2 * h);
    diff += (numeric - *g[i]) * (numeric - *g[i]);
    na += *g[i] * *g[i];
    nn += numeric * numeric;
  }
  GradientCheck out;
  out.analytic_norm = std::sqrt(na);
  out.numeric_norm = std::sqrt(nn);
  const double scale = std::max(out.analytic_norm, out.numeric_norm);
  out.relative_error = scale > 0 ? std::sqrt(diff) / scale : 0.0;
  return out;
}

}  // namespace oracle
