#pragma once

#include <Eigen/Dense>

namespace erem {

/// Dense row-major matrix; every cost, award and plan in the engine uses it.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// 1 - cos(h_i, h'_j) between two embedding tables. Entries lie in [0, 2].
using CostMatrix = Matrix;

/// Non-negative evidence counters, same shape as the cost they modify.
using AwardMatrix = Matrix;

}  // namespace erem
