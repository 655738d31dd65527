#pragma once

#include <cstddef>
#include <span>

#include "acorn/matrix.hpp"

namespace acorn {

// R(i, j): F1 after training task i, evaluated on task j's test set.
using ScoreMatrix = Eigen::MatrixXd;

// 2TP / (2TP + FP + FN); 0 when that denominator is 0.
double f1(std::span<const int> predictions, std::span<const int> labels);

// Mean of the last row.
double avg_f1(const ScoreMatrix& r);
// Mean of the strict upper triangle; 0 for a single task.
double fwd_transfer(const ScoreMatrix& r);
// sum_i (R(m-1,i) - R(i,i)) / (m(m-1)/2); 0 for a single task.
double bwd_transfer(const ScoreMatrix& r);

// Average precision: sum over distinct score cut points (descending) of
// precision * recall increment. Equal scores form one cut point.
double pr_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace acorn
