#include "acorn/pseudo_labeler.hpp"

#include "acorn/errors.hpp"
#include "acorn/kernels.hpp"
#include "acorn/rng.hpp"

namespace acorn {

ElbowResult elbow_k(const Matrix& x, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                    const KMeansOptions& opts) {
  const auto n = static_cast<std::size_t>(x.rows());
  if (k_min < 1 || k_min >= k_max || k_max > n) {
    throw ConfigError("elbow_k: need 1 <= k_min < k_max <= n (got k_min=" + std::to_string(k_min) +
                      ", k_max=" + std::to_string(k_max) + ", n=" + std::to_string(n) + ")");
  }
  ElbowResult out;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    out.inertia.push_back(fit_clusters(x, k, derive_seed(seed, "elbow", k), opts).inertia);
  }
  out.k = k_min;
  double best = 0.0;
  for (std::size_t i = 1; i + 1 < out.inertia.size(); ++i) {
    const double curvature = out.inertia[i - 1] - 2.0 * out.inertia[i] + out.inertia[i + 1];
    if (curvature > best) {
      best = curvature;
      out.k = k_min + i;
    }
  }
  return out;
}

PseudoLabels assign_pseudo_labels(const Centroids& c, const Matrix& x_train, const Matrix& x_clean) {
  if (x_clean.rows() == 0) throw DataError("assign_pseudo_labels: empty clean set");
  PseudoLabels out;
  out.normal_cluster_mask.assign(c.k(), false);
  for (auto idx : kernels::nearest_centers(x_clean, c.centers).index) out.normal_cluster_mask[idx] = true;
  out.labels = relabel(c, out.normal_cluster_mask, x_train);
  return out;
}

Labels relabel(const Centroids& c, const std::vector<bool>& normal_cluster_mask, const Matrix& x) {
  Labels labels;
  if (x.rows() == 0) return labels;
  const auto nearest = kernels::nearest_centers(x, c.centers);
  labels.reserve(nearest.index.size());
  for (auto idx : nearest.index) labels.push_back(normal_cluster_mask[idx] ? 0 : 1);
  return labels;
}

}  // namespace acorn
