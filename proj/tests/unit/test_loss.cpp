#include <doctest.h>

#include <cmath>
#include <random>

#include "dkgccl/errors.hpp"
#include "dkgccl/loss.hpp"
#include "fixtures.hpp"

using namespace dkgccl;
using namespace dkgccl::testing;

namespace {

LossConfig lc(double alpha, double tau = 0.5) {
  LossConfig cfg;
  cfg.variant = KernelCombination::linear_combination;
  cfg.alpha = alpha;
  cfg.tau = tau;
  return cfg;
}

LossConfig tp(double tau = 0.5) {
  LossConfig cfg;
  cfg.variant = KernelCombination::tensor_product;
  cfg.tau = tau;
  return cfg;
}

std::vector<LossConfig> all_configs() { return {tp(), lc(0.0), lc(0.5), lc(1.0), lc(0.3, 0.09)}; }

}  // namespace

TEST_CASE("feature maps") {
  Matrix v(1, 3);
  v << 0.0, -3.0, 2.0;
  CHECK(feature_map(v, FeatureMapKind::sigmoid)(0, 0) == 0.5);
  CHECK(feature_map(v, FeatureMapKind::relu)(0, 1) == 0.0);
  CHECK(feature_map(v, FeatureMapKind::relu)(0, 2) == 2.0);
  CHECK(feature_map(v, FeatureMapKind::elu_plus_one)(0, 0) == 1.0);
  CHECK(feature_map(v, FeatureMapKind::elu_plus_one)(0, 1) == doctest::Approx(std::exp(-3.0)));
  Matrix extreme(1, 2);
  extreme << -800.0, 800.0;
  const Matrix s = feature_map(extreme, FeatureMapKind::sigmoid);
  CHECK(s.allFinite());
  CHECK(s(0, 0) >= 0.0);
  CHECK(s(0, 1) == 1.0);
}

TEST_CASE("community kernel") {
  Matrix c(4, 2);
  c << 1, 2, 2, 4, -2, 1, 0, 0;
  const Matrix k = community_kernel(c, 0.5);
  CHECK(k(0, 1) == doctest::Approx(std::exp(2.0)).epsilon(1e-14));
  CHECK(k(0, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(k(3, 0) == 1.0);  // zero rows stay zero, so cosine 0
  CHECK(k == k.transpose());

  Matrix anti(2, 3);
  anti << 1, -2, 3, -1, 2, -3;
  const Matrix ka = community_kernel(anti, 0.05);
  CHECK(ka(0, 1) == doctest::Approx(std::exp(-20.0)).epsilon(1e-9));
  CHECK(ka(0, 1) == doctest::Approx(2.06e-9).epsilon(1e-2));
  CHECK(ka.allFinite());
  CHECK_THROWS_AS(community_kernel(anti, 0.0), ArgumentError);
}

TEST_CASE("aggregates satisfy their invariants") {
  std::mt19937_64 rng(1);
  const LossInstance inst = random_loss_instance(40, 6, 5, rng);
  const LossResult r = loss_fast(inst.nodes, inst.communities, inst.partition, inst.coarse, tp(0.2));
  RowVector s = RowVector::Zero(5);
  for (Index k = 0; k < 6; ++k) s += r.aggregates.community_sums.row(k);
  CHECK(s == r.aggregates.global_sum);
  const Matrix& k = r.aggregates.kernel;
  CHECK(k == k.transpose());
  CHECK(k.minCoeff() > 0.0);
  CHECK(k.maxCoeff() <= std::exp(1.0 / 0.2) * (1 + 1e-15));
  for (Index j = 0; j < 6; ++j) CHECK(r.aggregates.community_weights[j] == doctest::Approx(1.0));
}

TEST_CASE("fast loss equals the pairwise oracle") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = std::uniform_int_distribution<Index>(8, 64)(rng);
    const Index m = std::uniform_int_distribution<Index>(2, 8)(rng);
    const Index d = trial % 2 ? 16 : 4;
    const LossInstance inst = random_loss_instance(n, m, d, rng);
    for (const LossConfig& cfg : all_configs()) {
      const double fast = loss_fast(inst.nodes, inst.communities, inst.partition, inst.coarse, cfg).loss;
      const double oracle = loss_oracle(inst.nodes, inst.communities, inst.partition, inst.coarse, cfg);
      CHECK(relative_gap(fast, oracle) <= 1e-10);
    }
  }
}

TEST_CASE("oracle agrees with unit weights and without self positives") {
  std::mt19937_64 rng(3);
  LossInstance inst = random_loss_instance(30, 5, 4, rng);
  inst.partition = assignment_weights(inst.partition, WeightMode::unit);
  for (LossConfig cfg : all_configs()) {
    for (bool self : {true, false}) {
      cfg.include_self_community = self;
      // Without self positives every community needs a neighbour.
      Matrix coarse = inst.coarse;
      for (Index j = 0; j < 5; ++j) coarse(j, (j + 1) % 5) = coarse((j + 1) % 5, j) = 0.7;
      const double fast = loss_fast(inst.nodes, inst.communities, inst.partition, coarse, cfg).loss;
      const double oracle = loss_oracle(inst.nodes, inst.communities, inst.partition, coarse, cfg);
      CHECK(relative_gap(fast, oracle) <= 1e-10);
    }
  }
}

TEST_CASE("single community with row-normalized adjacency has zero loss") {
  std::mt19937_64 rng(4);
  LossInstance inst = random_loss_instance(15, 1, 3, rng);
  inst.coarse = Matrix::Ones(1, 1);  // any positive entry row-normalizes to 1
  for (const LossConfig& cfg : all_configs()) {
    CHECK(std::abs(loss_fast(inst.nodes, inst.communities, inst.partition, inst.coarse, cfg).loss) < 1e-15);
    CHECK(std::abs(loss_oracle(inst.nodes, inst.communities, inst.partition, inst.coarse, cfg)) < 1e-15);
  }
}

TEST_CASE("alpha = 1 ignores the community features") {
  std::mt19937_64 rng(5);
  const LossInstance inst = random_loss_instance(25, 4, 6, rng);
  const Matrix other = random_matrix(4, 6, rng);
  const double a = loss_fast(inst.nodes, inst.communities, inst.partition, inst.coarse, lc(1.0)).loss;
  const double b = loss_fast(inst.nodes, other, inst.partition, inst.coarse, lc(1.0)).loss;
  CHECK(a == b);
}

TEST_CASE("alpha = 0 ignores the node features bitwise") {
  std::mt19937_64 rng(6);
  const LossInstance inst = random_loss_instance(25, 4, 6, rng);
  const double a = loss_fast(inst.nodes, inst.communities, inst.partition, inst.coarse, lc(0.0)).loss;
  for (int k = 0; k < 5; ++k) {
    const Matrix other = random_matrix(25, 6, rng, 3.0);
    CHECK(loss_fast(other, inst.communities, inst.partition, inst.coarse, lc(0.0)).loss == a);
  }
}

TEST_CASE("loss is invariant to node order within communities") {
  std::mt19937_64 rng(7);
  const LossInstance inst = random_loss_instance(40, 5, 4, rng);
  std::vector<Index> order(40);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Matrix nodes(40, 4);
  std::vector<Index> ids(40);
  for (Index t = 0; t < 40; ++t) {
    nodes.row(t) = inst.nodes.row(order[t]);
    ids[t] = inst.partition.assignment[order[t]];
  }
  const Partition permuted = Partition::from_assignment(ids);
  for (const LossConfig& cfg : all_configs()) {
    const double a = loss_fast(inst.nodes, inst.communities, inst.partition, inst.coarse, cfg).loss;
    const double b = loss_fast(nodes, inst.communities, permuted, inst.coarse, cfg).loss;
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
  }
}

TEST_CASE("loss is invariant to relabelling communities") {
  std::mt19937_64 rng(8);
  const LossInstance inst = random_loss_instance(30, 4, 4, rng);
  const std::vector<Index> perm{2, 0, 3, 1};
  std::vector<Index> ids(30);
  for (Index t = 0; t < 30; ++t) ids[t] = perm[inst.partition.assignment[t]];
  const Partition q = Partition::from_assignment(ids);
  Matrix c(4, 4);
  Matrix a(4, 4);
  for (Index j = 0; j < 4; ++j) {
    c.row(perm[j]) = inst.communities.row(j);
    for (Index k = 0; k < 4; ++k) a(perm[j], perm[k]) = inst.coarse(j, k);
  }
  for (const LossConfig& cfg : all_configs()) {
    const double x = loss_fast(inst.nodes, inst.communities, inst.partition, inst.coarse, cfg).loss;
    const double y = loss_fast(inst.nodes, c, q, a, cfg).loss;
    CHECK(std::abs(x - y) <= 1e-12 * std::abs(x));
  }
}

TEST_CASE("empty positive sets are clamped in the fast path and undefined in the oracle") {
  std::mt19937_64 rng(9);
  LossInstance inst = random_loss_instance(10, 2, 3, rng);
  inst.coarse = Matrix::Identity(2, 2);
  LossConfig cfg = lc(0.5);
  cfg.include_self_community = false;
  const LossResult r = loss_fast(inst.nodes, inst.communities, inst.partition, inst.coarse, cfg);
  CHECK(r.clamped == 10);
  CHECK(std::isfinite(r.loss));
  CHECK_THROWS_AS(loss_oracle(inst.nodes, inst.communities, inst.partition, inst.coarse, cfg), UndefinedError);
  const FeatureLossAndGrad g = loss_and_feature_grad(inst.nodes, inst.communities, inst.partition, inst.coarse, cfg);
  CHECK(g.grads.nodes.allFinite());
}

TEST_CASE("oracle refuses large inputs and bad configs") {
  std::mt19937_64 rng(10);
  const Partition p = random_partition(10001, 2, rng);
  CHECK_THROWS_AS(loss_oracle(Matrix::Zero(10001, 1), Matrix::Ones(2, 1), p, Matrix::Ones(2, 2), lc(0.5)),
                  ArgumentError);
  LossConfig bad = lc(0.5);
  bad.tau = 0.0;
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
  bad = lc(1.5);
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("feature gradients match finite differences") {
  std::mt19937_64 rng(11);
  for (const LossConfig& cfg : all_configs()) {
    LossInstance inst = random_loss_instance(12, 3, 4, rng);
    const FeatureLossAndGrad g =
        loss_and_feature_grad(inst.nodes, inst.communities, inst.partition, inst.coarse, cfg);
    auto f = [&] { return loss_fast(inst.nodes, inst.communities, inst.partition, inst.coarse, cfg).loss; };
    CHECK(max_relative_error(g.grads.nodes, numeric_gradient(inst.nodes, f)) <= 1e-4);
    CHECK(max_relative_error(g.grads.communities, numeric_gradient(inst.communities, f)) <= 1e-4);
  }
}

TEST_CASE("parameter gradients match finite differences") {
  std::mt19937_64 rng(12);
  for (FeatureMapKind map : {FeatureMapKind::sigmoid, FeatureMapKind::elu_plus_one}) {
    for (LossConfig cfg : all_configs()) {
      cfg.feature_map = map;
      const Matrix x = random_matrix(20, 6, rng);
      const Partition p = random_partition(20, 3, rng);
      const Matrix coarse = random_coarse(3, rng);
      EncoderParams params = init_params(6, 4, 5, rng());
      const Matrix mask = sample_dropout_mask(20, 5, 0.2, rng);
      const FeatureOperator op(x);
      const LossAndGrad g = loss_and_grad(op, params, p, coarse, cfg, mask);
      auto f = [&] { return loss_and_grad(op, params, p, coarse, cfg, mask).loss; };
      CHECK(max_relative_error(g.grads.node_weights, numeric_gradient(params.node_weights, f)) <= 1e-4);
      CHECK(max_relative_error(g.grads.community_weights, numeric_gradient(params.community_weights, f)) <= 1e-4);
    }
  }
}

TEST_CASE("unused parameters get exactly zero gradient") {
  std::mt19937_64 rng(13);
  const Matrix x = random_matrix(15, 5, rng);
  const Partition p = random_partition(15, 3, rng);
  const Matrix coarse = random_coarse(3, rng);
  const EncoderParams params = init_params(5, 4, 4, 3);
  const Matrix mask = sample_dropout_mask(15, 4, 0.1, rng);
  const FeatureOperator op(x);
  CHECK(loss_and_grad(op, params, p, coarse, lc(1.0), mask).grads.community_weights.isZero(0.0));
  CHECK(loss_and_grad(op, params, p, coarse, lc(0.0), mask).grads.node_weights.isZero(0.0));
  CHECK_FALSE(loss_and_grad(op, params, p, coarse, lc(0.5), mask).grads.node_weights.isZero(0.0));
}

TEST_CASE("sigmoid keeps the million-node aggregate finite where unbounded maps overflow") {
  const Index n = 1000000;
  const Index m = 4;
  std::vector<Index> ids(n);
  for (Index t = 0; t < n; ++t) ids[t] = t % m;
  Partition p = assignment_weights(Partition::from_assignment(ids), WeightMode::unit);
  Matrix v = Matrix::Constant(n, 2, 1e303);
  v.col(1).setConstant(-2.0);
  const Matrix c = Matrix::Identity(m, 2) + Matrix::Constant(m, 2, 0.5);
  const Matrix coarse = Matrix::Identity(m, m);
  LossConfig cfg = lc(0.5);

  cfg.feature_map = FeatureMapKind::sigmoid;
  const LossResult ok = loss_fast(v, c, p, coarse, cfg);
  CHECK(std::isfinite(ok.loss));
  CHECK(ok.aggregates.global_sum.allFinite());
  CHECK(ok.aggregates.global_sum.maxCoeff() <= static_cast<double>(n));
  CHECK(ok.aggregates.community_sums.allFinite());

  for (FeatureMapKind map : {FeatureMapKind::relu, FeatureMapKind::elu_plus_one}) {
    cfg.feature_map = map;
    bool overflowed = false;
    try {
      const LossResult r = loss_fast(v, c, p, coarse, cfg);
      overflowed = !r.aggregates.global_sum.allFinite() || !std::isfinite(r.loss);
    } catch (const NumericalError&) {
      overflowed = true;
    }
    CHECK(overflowed);
  }
}

TEST_CASE("shape mismatches are argument errors") {
  std::mt19937_64 rng(14);
  const LossInstance inst = random_loss_instance(10, 3, 2, rng);
  CHECK_THROWS_AS(loss_fast(inst.nodes.topRows(9), inst.communities, inst.partition, inst.coarse, lc(0.5)),
                  ArgumentError);
  CHECK_THROWS_AS(loss_fast(inst.nodes, inst.communities, inst.partition, Matrix::Ones(2, 2), lc(0.5)),
                  ArgumentError);
}

TEST_CASE("parse helpers") {
  CHECK(parse_variant("tensor_product") == KernelCombination::tensor_product);
  CHECK(parse_feature_map("elu_plus_one") == FeatureMapKind::elu_plus_one);
  CHECK_THROWS(parse_variant("sum"));
  CHECK(to_string(KernelCombination::linear_combination) == "linear_combination");
}
