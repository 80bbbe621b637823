#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>

#include <Eigen/SparseCore>

#include "dkgccl/matrix.hpp"
#include "dkgccl/partition.hpp"

namespace dkgccl {

// Stage-1 trainables: W_G (h × d^G) projects to the node-level space, W_P
// (h × d^P) to the community-level space. No biases.
struct EncoderParams {
  Matrix node_weights;
  Matrix community_weights;

  Index input_dim() const { return node_weights.rows(); }
  Index node_dim() const { return node_weights.cols(); }
  Index community_dim() const { return community_weights.cols(); }
};

// Glorot-uniform initialisation, bound sqrt(6 / (h + d)), deterministic per seed.
EncoderParams init_params(Index input_dim, Index node_dim, Index community_dim, std::uint64_t seed);
Matrix glorot_uniform(Index rows, Index cols, std::mt19937_64& rng);

// Checkpoint layout (little-endian): u64 h, u64 d^G, u64 d^P, then W_G and
// W_P as row-major f64, then an optional u64 config digest.
void save_encoder(const std::filesystem::path& path, const EncoderParams& params,
                  std::optional<std::uint64_t> digest = std::nullopt);
EncoderParams load_encoder(const std::filesystem::path& path,
                           std::optional<std::uint64_t>* digest = nullptr);

struct DropoutSpec {
  double p = 0.0;
  void validate() const;
};

// Wraps the node feature matrix X. Bag-of-words style inputs are mostly zeros,
// so products go through a sparse copy when X is sparse enough; both routes
// give the same values up to summation order.
class FeatureOperator {
 public:
  explicit FeatureOperator(const Matrix& features, double sparse_threshold = 0.1);

  Index rows() const { return dense_->rows(); }
  Index cols() const { return dense_->cols(); }
  const Matrix& dense() const { return *dense_; }
  bool uses_sparse() const { return sparse_.has_value(); }

  Matrix times(const Matrix& w) const;             // X W
  Matrix transpose_times(const Matrix& g) const;   // Xᵀ G

 private:
  const Matrix* dense_;
  std::optional<Eigen::SparseMatrix<double, Eigen::RowMajor>> sparse_;
};

// v_i = x_i W_G.
Matrix node_level_features(const Matrix& features, const Matrix& node_weights);

// Inverted-dropout mask over an n × d^P matrix: entries are 0 with
// probability p and 1/(1-p) otherwise.
Matrix sample_dropout_mask(Index rows, Index cols, double p, std::mt19937_64& rng);

// c_j = Σ_{t∈P_j} P_{t,j} · (mask_t ⊙ projected_t).
Matrix aggregate_communities(const Matrix& projected, const Partition& partition,
                             const Matrix& mask);

struct CommunityFeatures {
  Matrix communities;  // m × d^P
  Matrix mask;         // n × d^P, retained for backprop
};

CommunityFeatures community_level_features(const Matrix& features, const Matrix& community_weights,
                                           const Partition& partition, const DropoutSpec& dropout,
                                           std::mt19937_64& rng);

struct BiLevelFeatures {
  Matrix nodes;
  Matrix communities;
  Matrix mask;
};

BiLevelFeatures bi_level_features(const FeatureOperator& features, const EncoderParams& params,
                                  const Partition& partition, const Matrix& mask);

// Expected number of feature dimensions on which dropout alters the member set
// of a community: d^P (1 - (1-p)^{|P_j|}).
double substructure_count_expectation(Index community_dim, double p, Index community_size);

// Monte-Carlo estimate of the same quantity: mean over `draws` independent
// masks of the number of dimensions where at least one member was dropped.
double substructure_count_monte_carlo(Index community_dim, double p, Index community_size,
                                      Index draws, std::mt19937_64& rng);

}  // namespace dkgccl
