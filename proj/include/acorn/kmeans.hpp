#pragma once

// Mini-batch K-Means (per-center learning rate 1/count) with k-means++
// seeding. Used both to partition normal traffic into drifting tasks and by
// the pseudo-labeler.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "acorn/matrix.hpp"

namespace acorn {

struct KMeansOptions {
  std::size_t batch_size = 1024;
  int max_epochs = 10;
  double tolerance = 1e-4;  // stop when no center moves further than this in an epoch
};

struct Centroids {
  Matrix centers;        // K x d, pairwise distinct
  double inertia = 0.0;  // sum of squared distances to the nearest center

  std::size_t k() const { return static_cast<std::size_t>(centers.rows()); }
  nlohmann::json to_json() const;
};

// Exactly equal centers are merged after fitting, so the result may hold
// fewer than k centers when the data has fewer than k distinct rows.
Centroids fit_clusters(const Matrix& x, std::size_t k, std::uint64_t seed,
                       const KMeansOptions& opts = {});

std::vector<std::size_t> assign_clusters(const Centroids& c, const Matrix& x);

}  // namespace acorn
