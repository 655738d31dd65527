#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace acorn {

// Row-major so that a sample is a contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// 0 = normal, 1 = attack / anomalous.
using Labels = std::vector<int>;

Matrix take_rows(const Matrix& x, std::span<const std::size_t> rows);
Matrix vstack(const Matrix& top, const Matrix& bottom);

// Rows of `x` paired with a label per row. An unlabeled set uses label -1.
struct LabeledRows {
  Matrix rows;
  Labels labels;

  std::size_t size() const { return static_cast<std::size_t>(rows.rows()); }
  bool empty() const { return rows.rows() == 0; }
};

}  // namespace acorn
