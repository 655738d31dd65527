#include "acorn/kmeans.hpp"

#include <algorithm>
#include <numeric>

#include "acorn/errors.hpp"
#include "acorn/kernels.hpp"
#include "acorn/rng.hpp"

namespace acorn {
namespace {

Matrix kmeans_plus_plus(const Matrix& x, std::size_t k, Rng& rng) {
  const auto n = static_cast<std::size_t>(x.rows());
  Matrix centers(static_cast<Eigen::Index>(k), x.cols());
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  centers.row(0) = x.row(static_cast<Eigen::Index>(pick(rng)));

  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    d2[i] = (x.row(static_cast<Eigen::Index>(i)) - centers.row(0)).squaredNorm();
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = unit(rng) * total;
      double acc = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (acc > target && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(static_cast<Eigen::Index>(c)) = x.row(static_cast<Eigen::Index>(chosen));
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (x.row(static_cast<Eigen::Index>(i)) -
                               centers.row(static_cast<Eigen::Index>(c))).squaredNorm());
    }
  }
  return centers;
}

Matrix merge_duplicates(const Matrix& centers) {
  std::vector<Eigen::Index> keep;
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    bool dup = false;
    for (auto k : keep) {
      if (centers.row(k) == centers.row(c)) {
        dup = true;
        break;
      }
    }
    if (!dup) keep.push_back(c);
  }
  Matrix out(static_cast<Eigen::Index>(keep.size()), centers.cols());
  for (std::size_t i = 0; i < keep.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = centers.row(keep[i]);
  return out;
}

}  // namespace

nlohmann::json Centroids::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    rows.push_back(std::vector<double>(centers.row(c).begin(), centers.row(c).end()));
  }
  return {{"k", k()}, {"inertia", inertia}, {"centers", rows}};
}

Centroids fit_clusters(const Matrix& x, std::size_t k, std::uint64_t seed, const KMeansOptions& opts) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (k == 0) throw DataError("fit_clusters: k must be at least 1");
  if (n < k) {
    throw DataError("fit_clusters: " + std::to_string(n) + " rows is fewer than k=" + std::to_string(k));
  }
  Rng rng(seed);
  Matrix centers = kmeans_plus_plus(x, k, rng);
  std::vector<double> counts(k, 0.0);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t batch = std::max<std::size_t>(1, opts.batch_size);

  for (int epoch = 0; epoch < opts.max_epochs; ++epoch) {
    const Matrix before = centers;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t len = std::min(batch, n - start);
      const Matrix xb = take_rows(x, std::span(order).subspan(start, len));
      const auto nearest = kernels::nearest_centers(xb, centers);
      for (std::size_t i = 0; i < len; ++i) {
        const auto c = static_cast<Eigen::Index>(nearest.index[i]);
        counts[nearest.index[i]] += 1.0;
        const double eta = 1.0 / counts[nearest.index[i]];
        centers.row(c) += eta * (xb.row(static_cast<Eigen::Index>(i)) - centers.row(c));
      }
    }

    // Empty-cluster repair: a center that owns no rows jumps to the row
    // farthest from where it currently sits.
    const auto owner = kernels::nearest_centers(x, centers);
    std::vector<std::size_t> owned(k, 0);
    for (auto c : owner.index) ++owned[c];
    bool repaired = false;
    for (std::size_t c = 0; c < k; ++c) {
      if (owned[c] > 0) continue;
      const auto ci = static_cast<Eigen::Index>(c);
      Eigen::Index far = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double d = (x.row(i) - centers.row(ci)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centers.row(ci) = x.row(far);
      counts[c] = 1.0;
      repaired = true;
    }

    const double shift = (centers - before).rowwise().norm().maxCoeff();
    if (!repaired && shift < opts.tolerance) break;
  }

  Centroids out;
  out.centers = merge_duplicates(centers);
  const auto final_assign = kernels::nearest_centers(x, out.centers);
  out.inertia = std::accumulate(final_assign.sq_distance.begin(), final_assign.sq_distance.end(), 0.0);
  return out;
}

std::vector<std::size_t> assign_clusters(const Centroids& c, const Matrix& x) {
  return kernels::nearest_centers(x, c.centers).index;
}

}  // namespace acorn
