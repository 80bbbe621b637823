#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "dkgccl/graph.hpp"
#include "dkgccl/matrix.hpp"

namespace dkgccl {

// Two-layer perceptron d^G -> hidden -> d^G with a relu hidden layer.
struct DistillMlp {
  Matrix w1;      // d^G × hidden
  RowVector b1;   // hidden
  Matrix w2;      // hidden × d^G
  RowVector b2;   // d^G

  Index input_dim() const { return w1.rows(); }
  Index hidden_dim() const { return w1.cols(); }
  Index output_dim() const { return w2.cols(); }
  void validate() const;
};

// Glorot-uniform weights, zero biases.
DistillMlp init_mlp(Index dim, Index hidden, std::uint64_t seed);

// Checkpoint layout: u64 d^G, u64 hidden, then W1, b1, W2, b2 as f64, then an
// optional u64 config digest.
void save_mlp(const std::filesystem::path& path, const DistillMlp& mlp,
              std::optional<std::uint64_t> digest = std::nullopt);
DistillMlp load_mlp(const std::filesystem::path& path,
                    std::optional<std::uint64_t>* digest = nullptr);

// (1/K) Σ_{k=1..K} Ã^k X W_G.
Matrix propagation_target(const SparseGraph& g, const Matrix& node_weights, int hops);

Matrix mlp_forward(const DistillMlp& mlp, const Matrix& inputs);

struct MlpGradients {
  Matrix w1;
  RowVector b1;
  Matrix w2;
  RowVector b2;
};

struct DistillLossAndGrad {
  double loss = 0.0;  // ||MLP(V) - T||_F^2, not divided by n
  MlpGradients grads;
};

DistillLossAndGrad distill_loss_and_grad(const DistillMlp& mlp, const Matrix& inputs,
                                         const Matrix& target);

enum class Activation { identity, relu, prelu };
Activation parse_activation(const std::string& s);
std::string to_string(Activation a);
// prelu uses a fixed negative slope of 0.25.
Matrix apply_activation(const Matrix& values, Activation a);

enum class RepresentationSource { gnn_propagated, distilled };

struct FinalRepresentation {
  Matrix z;
  RepresentationSource source = RepresentationSource::gnn_propagated;
};

// With an MLP: σ(XW_G + MLP(XW_G)); reads only X, W_G and the MLP.
// Without: σ(XW_G + (1/K) Σ Ã^k X W_G).
FinalRepresentation final_representation(const SparseGraph& g, const Matrix& node_weights,
                                         const DistillMlp* mlp, int hops, Activation sigma);

}  // namespace dkgccl
