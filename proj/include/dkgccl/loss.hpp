#pragma once

#include <string>

#include "dkgccl/encoder.hpp"
#include "dkgccl/matrix.hpp"
#include "dkgccl/partition.hpp"

namespace dkgccl {

// How the node-level kernel κ_G(v_i, v_t) = φ(v_i)·φ(v_t) and the community
// kernel κ_P(c_j, c_k) are combined into the bi-level kernel κ_B.
enum class KernelCombination {
  tensor_product,      // κ_B = κ_P · κ_G
  linear_combination,  // κ_B = α κ_G + (1-α) κ_P
};

enum class FeatureMapKind { sigmoid, relu, elu_plus_one };

struct LossConfig {
  KernelCombination variant = KernelCombination::linear_combination;
  double alpha = 0.5;  // linear_combination only
  double tau = 0.5;
  FeatureMapKind feature_map = FeatureMapKind::sigmoid;
  // Count a community as its own positive when A^P_{jj} > 0.
  bool include_self_community = true;
  double epsilon_clamp = 1e-12;

  void validate() const;
};

KernelCombination parse_variant(const std::string& s);
FeatureMapKind parse_feature_map(const std::string& s);
std::string to_string(KernelCombination variant);
std::string to_string(FeatureMapKind kind);

Matrix feature_map(const Matrix& values, FeatureMapKind kind);
Matrix feature_map_derivative(const Matrix& values, FeatureMapKind kind);

// Rows scaled to unit L2 norm; all-zero rows stay zero.
Matrix normalize_rows(const Matrix& values);

// K_P[j,k] = exp(ĉ_j·ĉ_k / τ) on L2-normalised rows.
Matrix community_kernel(const Matrix& communities, double tau);

// Quantities shared by every node of a community (or by all nodes) in the
// linear-time loss.
struct LossAggregates {
  Matrix mapped_nodes;       // φ(V), n × d^G
  Matrix community_sums;     // s_k = Σ_{t∈P_k} P_{t,k} φ(v_t), m × d^G
  RowVector global_sum;      // S = Σ_k s_k
  Matrix kernel;             // K_P, m × m
  Vector community_weights;  // w_k = Σ_{t∈P_k} P_{t,k}
};

struct LossResult {
  double loss = 0.0;
  LossAggregates aggregates;
  Index clamped = 0;  // numerators raised to epsilon_clamp
};

// Reference value: expands ℓ(v_i, P_j) over every (node, node) pair. O(n² d).
// Throws ArgumentError for n > 10⁴ and UndefinedError when a node has no
// positive mass.
double loss_oracle(const Matrix& nodes, const Matrix& communities, const Partition& partition,
                   const Matrix& coarse_adjacency, const LossConfig& cfg);

// Linear-time loss. Numerator and denominator brackets are built once per
// community and reused for its nodes.
LossResult loss_fast(const Matrix& nodes, const Matrix& communities, const Partition& partition,
                     const Matrix& coarse_adjacency, const LossConfig& cfg);

struct FeatureGradients {
  Matrix nodes;        // ∂L/∂V
  Matrix communities;  // ∂L/∂C
};

struct FeatureLossAndGrad {
  double loss = 0.0;
  FeatureGradients grads;
  Index clamped = 0;
};

// Loss and its gradient with respect to the bi-level features themselves.
FeatureLossAndGrad loss_and_feature_grad(const Matrix& nodes, const Matrix& communities,
                                         const Partition& partition,
                                         const Matrix& coarse_adjacency, const LossConfig& cfg);

struct LossGradients {
  Matrix node_weights;       // ∂L/∂W_G
  Matrix community_weights;  // ∂L/∂W_P
};

struct LossAndGrad {
  double loss = 0.0;
  LossGradients grads;
  Index clamped = 0;
};

// Full stage-1 objective: features from (X, params, mask), loss, and
// backpropagation to W_G and W_P. Throws NumericalError naming the offending
// gradient when it is not finite.
LossAndGrad loss_and_grad(const FeatureOperator& features, const EncoderParams& params,
                          const Partition& partition, const Matrix& coarse_adjacency,
                          const LossConfig& cfg, const Matrix& mask);

}  // namespace dkgccl
