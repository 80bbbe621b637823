#include "dkgccl/encoder.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "dkgccl/errors.hpp"

namespace dkgccl {

Matrix glorot_uniform(Index rows, Index cols, std::mt19937_64& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix w(rows, cols);
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  return w;
}

EncoderParams init_params(Index input_dim, Index node_dim, Index community_dim,
                          std::uint64_t seed) {
  if (input_dim < 1 || node_dim < 1 || community_dim < 1) {
    throw ArgumentError("init_params: dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  EncoderParams p;
  p.node_weights = glorot_uniform(input_dim, node_dim, rng);
  p.community_weights = glorot_uniform(input_dim, community_dim, rng);
  return p;
}

void save_encoder(const std::filesystem::path& path, const EncoderParams& params,
                  std::optional<std::uint64_t> digest) {
  if (params.node_weights.rows() != params.community_weights.rows()) {
    throw ArgumentError("save_encoder: W_G and W_P disagree on input dimension");
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  const std::uint64_t header[3] = {static_cast<std::uint64_t>(params.input_dim()),
                                   static_cast<std::uint64_t>(params.node_dim()),
                                   static_cast<std::uint64_t>(params.community_dim())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  for (const Matrix* m : {&params.node_weights, &params.community_weights}) {
    out.write(reinterpret_cast<const char*>(m->data()),
              static_cast<std::streamsize>(m->size() * sizeof(double)));
  }
  if (digest) out.write(reinterpret_cast<const char*>(&*digest), sizeof(std::uint64_t));
}

EncoderParams load_encoder(const std::filesystem::path& path,
                           std::optional<std::uint64_t>* digest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::uint64_t header[3] = {0, 0, 0};
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw InputError(path.string() + ": truncated encoder header");
  const std::uint64_t payload = header[0] * (header[1] + header[2]) * sizeof(double);
  const auto size = std::filesystem::file_size(path);
  const bool has_digest = size == sizeof(header) + payload + sizeof(std::uint64_t);
  if (size != sizeof(header) + payload && !has_digest) {
    throw InputError(path.string() + ": size does not match encoder header");
  }
  EncoderParams p;
  p.node_weights.resize(static_cast<Index>(header[0]), static_cast<Index>(header[1]));
  p.community_weights.resize(static_cast<Index>(header[0]), static_cast<Index>(header[2]));
  for (Matrix* m : {&p.node_weights, &p.community_weights}) {
    in.read(reinterpret_cast<char*>(m->data()), static_cast<std::streamsize>(m->size() * sizeof(double)));
  }
  std::uint64_t stored = 0;
  if (has_digest) in.read(reinterpret_cast<char*>(&stored), sizeof(stored));
  if (!in) throw InputError(path.string() + ": truncated encoder payload");
  if (digest) *digest = has_digest ? std::optional<std::uint64_t>(stored) : std::nullopt;
  return p;
}

void DropoutSpec::validate() const {
  if (!(p >= 0.0 && p < 1.0)) throw ArgumentError("dropout probability must be in [0, 1)");
}

FeatureOperator::FeatureOperator(const Matrix& features, double sparse_threshold)
    : dense_(&features) {
  const Index nonzeros = (features.array() != 0.0).count();
  if (features.size() > 0 &&
      static_cast<double>(nonzeros) < sparse_threshold * static_cast<double>(features.size())) {
    sparse_ = features.sparseView();
  }
}

Matrix FeatureOperator::times(const Matrix& w) const {
  if (w.rows() != cols()) throw ArgumentError("FeatureOperator::times: shape mismatch");
  if (sparse_) return *sparse_ * w;
  return *dense_ * w;
}

Matrix FeatureOperator::transpose_times(const Matrix& g) const {
  if (g.rows() != rows()) throw ArgumentError("FeatureOperator::transpose_times: shape mismatch");
  if (sparse_) return sparse_->transpose() * g;
  return dense_->transpose() * g;
}

Matrix node_level_features(const Matrix& features, const Matrix& node_weights) {
  if (features.cols() != node_weights.rows()) {
    throw ArgumentError("node_level_features: X has " + std::to_string(features.cols()) +
                        " columns, W_G has " + std::to_string(node_weights.rows()) + " rows");
  }
  return features * node_weights;
}

Matrix sample_dropout_mask(Index rows, Index cols, double p, std::mt19937_64& rng) {
  DropoutSpec{p}.validate();
  if (p == 0.0) return Matrix::Ones(rows, cols);
  const double keep_scale = 1.0 / (1.0 - p);
  std::bernoulli_distribution drop(p);
  Matrix mask(rows, cols);
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = drop(rng) ? 0.0 : keep_scale;
  return mask;
}

Matrix aggregate_communities(const Matrix& projected, const Partition& partition,
                             const Matrix& mask) {
  if (projected.rows() != partition.num_nodes() || mask.rows() != projected.rows() ||
      mask.cols() != projected.cols()) {
    throw ArgumentError("aggregate_communities: shape mismatch");
  }
  Matrix out = Matrix::Zero(partition.m, projected.cols());
  for (Index t = 0; t < projected.rows(); ++t) {
    out.row(partition.assignment[t]).noalias() +=
        partition.weights[t] * projected.row(t).cwiseProduct(mask.row(t));
  }
  return out;
}

CommunityFeatures community_level_features(const Matrix& features, const Matrix& community_weights,
                                           const Partition& partition, const DropoutSpec& dropout,
                                           std::mt19937_64& rng) {
  dropout.validate();
  if (features.cols() != community_weights.rows()) {
    throw ArgumentError("community_level_features: shape mismatch");
  }
  const Matrix projected = features * community_weights;
  CommunityFeatures out;
  out.mask = sample_dropout_mask(projected.rows(), projected.cols(), dropout.p, rng);
  out.communities = aggregate_communities(projected, partition, out.mask);
  return out;
}

BiLevelFeatures bi_level_features(const FeatureOperator& features, const EncoderParams& params,
                                  const Partition& partition, const Matrix& mask) {
  BiLevelFeatures out;
  out.nodes = features.times(params.node_weights);
  out.communities = aggregate_communities(features.times(params.community_weights), partition, mask);
  out.mask = mask;
  return out;
}

double substructure_count_expectation(Index community_dim, double p, Index community_size) {
  if (!(p >= 0.0 && p <= 1.0) || community_size < 1) {
    throw ArgumentError("substructure_count_expectation: need p in [0,1] and size >= 1");
  }
  return static_cast<double>(community_dim) *
         (1.0 - std::pow(1.0 - p, static_cast<double>(community_size)));
}

double substructure_count_monte_carlo(Index community_dim, double p, Index community_size,
                                      Index draws, std::mt19937_64& rng) {
  if (draws < 1) throw ArgumentError("substructure_count_monte_carlo: draws must be positive");
  std::bernoulli_distribution drop(p);
  std::uint64_t altered = 0;
  for (Index d = 0; d < draws; ++d) {
    for (Index s = 0; s < community_dim; ++s) {
      bool any = false;
      // Every member's mask entry is drawn even after a drop is seen, so the
      // sample is a full mask as in training.
      for (Index t = 0; t < community_size; ++t) any = drop(rng) || any;
      altered += any;
    }
  }
  return static_cast<double>(altered) / static_cast<double>(draws);
}

}  // namespace dkgccl
