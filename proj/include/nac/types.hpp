#pragma once

#include <Eigen/Dense>

namespace nac {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Policy table: row s is the action distribution pi(.|s).
using PolicyTable = Eigen::MatrixXd;

}  // namespace nac
