#pragma once

#include <Eigen/Dense>

namespace dopt {

using Vector = Eigen::VectorXd;

/// m x d stack of per-node vectors; row i belongs to node i.
using NodeMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Mean of the rows of `z` as a column vector.
inline Vector row_mean(const NodeMatrix& z) { return z.colwise().mean().transpose(); }

}  // namespace dopt
