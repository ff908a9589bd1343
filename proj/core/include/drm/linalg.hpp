#pragma once

#include <Eigen/Dense>

namespace drm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Points are stored column-wise: a d x n matrix holds n points in R^d.
using PointSet = Eigen::MatrixXd;

}  // namespace drm
