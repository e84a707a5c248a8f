#pragma once

#include <Eigen/Dense>

namespace fairbench {

/// Row-major so per-node rows are contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace fairbench
