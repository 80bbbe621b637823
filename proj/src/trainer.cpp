#include "dkgccl/trainer.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <random>

#include "dkgccl/errors.hpp"
#include "dkgccl/optim.hpp"

namespace dkgccl {

void TrainConfig::validate() const {
  if (epochs < 1) throw ArgumentError("train: epochs must be >= 1");
  if (distill_epochs < 1) throw ArgumentError("train: distill_epochs must be >= 1");
  if (!(lr > 0.0) || !(distill_lr > 0.0)) throw ArgumentError("train: lr must be positive");
  if (!(weight_decay >= 0.0)) throw ArgumentError("train: weight_decay must be non-negative");
  if (node_dim < 1 || community_dim < 1 || hidden_dim < 0) {
    throw ArgumentError("train: dimensions must be positive");
  }
  if (hops < 1) throw ArgumentError("train: hops must be >= 1");
  loss.validate();
  dropout.validate();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

Stage1Result train_stage1(const SparseGraph& g, const Partition& partition,
                          const Matrix& coarse_adjacency, const TrainConfig& cfg,
                          const EncoderParams* init) {
  cfg.validate();
  partition.validate(g.num_nodes());
  const FeatureOperator x(g.features());

  Stage1Result r;
  r.params = init ? *init
                  : init_params(g.feature_dim(), cfg.node_dim, cfg.community_dim,
                                derive_seed(cfg.seed, SeedStream::encoder_init));
  if (r.params.input_dim() != g.feature_dim()) {
    throw ArgumentError("train_stage1: encoder input dimension does not match X");
  }
  r.initial = r.params;

  std::mt19937_64 rng(derive_seed(cfg.seed, SeedStream::dropout));
  AdamState adam(AdamConfig{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = Clock::now();
    const Matrix mask =
        sample_dropout_mask(g.num_nodes(), r.params.community_dim(), cfg.dropout.p, rng);
    const LossAndGrad step = loss_and_grad(x, r.params, partition, coarse_adjacency, cfg.loss, mask);
    adam.step({slot("W_G", r.params.node_weights, step.grads.node_weights),
               slot("W_P", r.params.community_weights, step.grads.community_weights)});
    r.trace.push_back({epoch, step.loss, elapsed_ms(start), step.clamped});
  }
  return r;
}

Stage2Result train_stage2(const SparseGraph& g, const Matrix& node_weights, const TrainConfig& cfg,
                          const DistillMlp* init) {
  cfg.validate();
  if (node_weights.rows() != g.feature_dim()) {
    throw ArgumentError("train_stage2: W_G does not match the feature dimension");
  }
  const FeatureOperator x(g.features());
  const Matrix inputs = x.times(node_weights);

  Stage2Result r;
  r.target = k_hop_mean(normalized_adjacency(g), inputs, cfg.hops);
  const Index dim = node_weights.cols();
  r.mlp = init ? *init
               : init_mlp(dim, cfg.hidden_dim > 0 ? cfg.hidden_dim : dim,
                          derive_seed(cfg.seed, SeedStream::mlp_init));
  if (r.mlp.input_dim() != dim) throw ArgumentError("train_stage2: MLP width does not match d^G");

  AdamState adam(AdamConfig{cfg.distill_lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  for (int epoch = 1; epoch <= cfg.distill_epochs; ++epoch) {
    const auto start = Clock::now();
    const DistillLossAndGrad step = distill_loss_and_grad(r.mlp, inputs, r.target);
    if (!std::isfinite(step.loss)) throw NumericalError("distillation loss is not finite");
    adam.step({slot("W1", r.mlp.w1, step.grads.w1), slot("b1", r.mlp.b1, step.grads.b1),
               slot("W2", r.mlp.w2, step.grads.w2), slot("b2", r.mlp.b2, step.grads.b2)});
    r.trace.push_back({epoch, step.loss, elapsed_ms(start), 0});
  }
  return r;
}

}  // namespace dkgccl
