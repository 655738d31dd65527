#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "acorn/kmeans.hpp"
#include "acorn/matrix.hpp"

namespace acorn {

struct ElbowResult {
  std::size_t k = 1;
  std::vector<double> inertia;  // inertia[i] belongs to k_min + i
};

// Fits k = k_min..k_max and returns the interior k with the largest discrete
// second difference inertia(k-1) - 2 inertia(k) + inertia(k+1). When no
// interior k has a positive second difference the curve has no elbow and
// k_min is returned. Ties go to the smaller k.
ElbowResult elbow_k(const Matrix& x, std::size_t k_min, std::size_t k_max, std::uint64_t seed,
                    const KMeansOptions& opts = {});

struct PseudoLabels {
  Labels labels;                         // 0 normal, 1 anomalous
  std::vector<bool> normal_cluster_mask;  // per center
};

// A cluster is normal when it is the nearest center of at least one clean row.
PseudoLabels assign_pseudo_labels(const Centroids& c, const Matrix& x_train, const Matrix& x_clean);

// Labels for arbitrary rows from a stored (centers, mask) pair.
Labels relabel(const Centroids& c, const std::vector<bool>& normal_cluster_mask, const Matrix& x);

}  // namespace acorn
