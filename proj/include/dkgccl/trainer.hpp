#pragma once

#include <cstdint>
#include <vector>

#include "dkgccl/distill.hpp"
#include "dkgccl/encoder.hpp"
#include "dkgccl/graph.hpp"
#include "dkgccl/loss.hpp"
#include "dkgccl/partition.hpp"

namespace dkgccl {

struct TrainConfig {
  int epochs = 15;           // T^g
  int distill_epochs = 300;  // T^d
  double lr = 0.005;
  double distill_lr = 0.01;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  Index node_dim = 64;       // d^G
  Index community_dim = 64;  // d^P
  Index hidden_dim = 0;      // MLP width; 0 means d^G
  int hops = 3;              // K
  LossConfig loss;
  DropoutSpec dropout;

  void validate() const;
};

// Independent, reproducible seeds for the separate random streams of a run.
enum class SeedStream : std::uint64_t { encoder_init = 1, dropout = 2, mlp_init = 3 };
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
inline std::uint64_t derive_seed(std::uint64_t seed, SeedStream stream) {
  return derive_seed(seed, static_cast<std::uint64_t>(stream));
}

struct EpochRecord {
  int epoch = 0;
  double loss = 0.0;
  double wall_ms = 0.0;
  Index clamped = 0;
};

struct Stage1Result {
  EncoderParams params;
  EncoderParams initial;
  std::vector<EpochRecord> trace;
};

// Contrastive training of W_G and W_P. Each epoch draws one dropout mask,
// builds the bi-level features, and takes one Adam step.
Stage1Result train_stage1(const SparseGraph& g, const Partition& partition,
                          const Matrix& coarse_adjacency, const TrainConfig& cfg,
                          const EncoderParams* init = nullptr);

struct Stage2Result {
  DistillMlp mlp;
  Matrix target;  // frozen (1/K) Σ Ã^k X W_G
  std::vector<EpochRecord> trace;
};

// Regresses the MLP onto the propagated target; the target is computed once
// before the first epoch.
Stage2Result train_stage2(const SparseGraph& g, const Matrix& node_weights, const TrainConfig& cfg,
                          const DistillMlp* init = nullptr);

}  // namespace dkgccl
