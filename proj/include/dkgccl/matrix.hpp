#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace dkgccl {

// Row-major so that node rows are contiguous; every matrix in the library
// stores one node (or community) per row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

using NodeId = std::int64_t;
using Index = std::ptrdiff_t;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace dkgccl
