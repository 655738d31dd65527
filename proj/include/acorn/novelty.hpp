#pragma once

// PCA novelty scoring. The basis is fit on encoded clean rows; a row's score
// (feature reconstruction error, FRE) is the squared norm of what is left
// after projecting it onto mean + span(components) and mapping back, i.e. its
// squared distance to that affine subspace.

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "acorn/matrix.hpp"

namespace acorn {

struct PcaBasis {
  RowVector mean;
  Matrix components;  // r x p, orthonormal rows, by decreasing variance
  std::vector<double> explained_variance_ratio;  // retained components only

  std::size_t rank() const { return static_cast<std::size_t>(components.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  nlohmann::json summary() const;
};

// Smallest r whose cumulative explained-variance ratio reaches
// variance_target. Identical rows give r = 0.
PcaBasis fit_pca(const Matrix& h, double variance_target = 0.95);

Vector fre_score(const PcaBasis& basis, const Matrix& h);

// mu and sigma use the population (divide by n) convention; tau = mu + 2 sigma.
struct Threshold {
  double mean = 0.0;
  double stddev = 0.0;
  double tau = 0.0;
};

Threshold calibrate_threshold(std::span<const double> validation_scores);

// 1 where score > tau (strict).
Labels classify(std::span<const double> scores, double tau);

struct NoveltyModel {
  PcaBasis basis;
  Threshold threshold;
};

}  // namespace acorn
