#pragma once

// Data-parallel inner loops of the pipeline. Each kernel has an OpenMP
// implementation (used by the library) and a plain serial reference in
// `kernels::serial` that the tests and the benchmark compare against.
//
// Parallel kernels split rows into fixed-size chunks that do not depend on the
// thread count, so results are bitwise reproducible for any OMP_NUM_THREADS.

#include <cstddef>
#include <vector>

#include "acorn/matrix.hpp"

namespace acorn::kernels {

inline constexpr Eigen::Index kRowChunk = 64;

struct NearestCenter {
  std::vector<std::size_t> index;  // lowest index wins ties
  std::vector<double> sq_distance;
};

// y = x * weights + bias, where weights is in_dim x out_dim.
void affine(const Matrix& x, const Matrix& weights, const RowVector& bias, Matrix& y);

NearestCenter nearest_centers(const Matrix& x, const Matrix& centers);

// Squared norm of each row's residual after projecting (row - mean) onto the
// row space of `components` (r x p, orthonormal rows).
Vector subspace_residuals(const Matrix& h, const RowVector& mean, const Matrix& components);

// Mean squared difference per row.
Vector row_mse(const Matrix& a, const Matrix& b);

int max_threads();

namespace serial {

void affine(const Matrix& x, const Matrix& weights, const RowVector& bias, Matrix& y);
NearestCenter nearest_centers(const Matrix& x, const Matrix& centers);
Vector subspace_residuals(const Matrix& h, const RowVector& mean, const Matrix& components);
Vector row_mse(const Matrix& a, const Matrix& b);

}  // namespace serial

}  // namespace acorn::kernels
