#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "dkgccl/encoder.hpp"
#include "dkgccl/loss.hpp"
#include "dkgccl/partition.hpp"
#include "test_support.hpp"

namespace dkgccl::testing {

// Random assignment of n nodes to exactly m non-empty communities.
inline Partition random_partition(Index n, Index m, std::mt19937_64& rng) {
  std::vector<Index> ids(static_cast<std::size_t>(n));
  for (Index t = 0; t < n; ++t) ids[t] = t < m ? t : std::uniform_int_distribution<Index>(0, m - 1)(rng);
  std::shuffle(ids.begin(), ids.end(), rng);
  return Partition::from_assignment(ids);
}

// Symmetric non-negative community adjacency with a positive diagonal and
// roughly half of the off-diagonal entries zero.
inline Matrix random_coarse(Index m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix a = Matrix::Zero(m, m);
  for (Index j = 0; j < m; ++j) {
    a(j, j) = 0.2 + u(rng);
    for (Index k = j + 1; k < m; ++k) {
      if (u(rng) < 0.5) a(j, k) = a(k, j) = u(rng);
    }
  }
  return a;
}

struct LossInstance {
  Matrix nodes;
  Matrix communities;
  Partition partition;
  Matrix coarse;
};

inline LossInstance random_loss_instance(Index n, Index m, Index dim, std::mt19937_64& rng) {
  LossInstance inst;
  inst.partition = random_partition(n, m, rng);
  inst.coarse = random_coarse(m, rng);
  inst.nodes = random_matrix(n, dim, rng);
  inst.communities = random_matrix(m, dim, rng);
  return inst;
}

// Central differences of a scalar function with respect to every entry of `param`.
template <typename F>
Matrix numeric_gradient(Matrix& param, F&& f, double step = 1e-5) {
  Matrix grad(param.rows(), param.cols());
  for (Index i = 0; i < param.size(); ++i) {
    const double saved = param.data()[i];
    param.data()[i] = saved + step;
    const double up = f();
    param.data()[i] = saved - step;
    const double down = f();
    param.data()[i] = saved;
    grad.data()[i] = (up - down) / (2.0 * step);
  }
  return grad;
}

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor). The floor keeps entries whose
// true gradient is ~0 from turning finite-difference noise into huge ratios.
inline double max_relative_error(const Matrix& analytic, const Matrix& numeric, double floor = 1e-6) {
  double worst = 0.0;
  for (Index i = 0; i < analytic.size(); ++i) {
    const double a = analytic.data()[i];
    const double b = numeric.data()[i];
    worst = std::max(worst, std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor}));
  }
  return worst;
}

inline double relative_gap(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace dkgccl::testing
