#include "dkgccl/loss.hpp"

#include <cmath>
#include <vector>

#include "dkgccl/errors.hpp"

namespace dkgccl {

void LossConfig::validate() const {
  if (!(tau > 0.0)) throw ArgumentError("tau must be positive");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must be in [0, 1]");
  if (!(epsilon_clamp > 0.0)) throw ArgumentError("epsilon_clamp must be positive");
}

KernelCombination parse_variant(const std::string& s) {
  if (s == "tensor_product") return KernelCombination::tensor_product;
  if (s == "linear_combination") return KernelCombination::linear_combination;
  throw ConfigError("unknown loss variant '" + s + "'");
}

FeatureMapKind parse_feature_map(const std::string& s) {
  if (s == "sigmoid") return FeatureMapKind::sigmoid;
  if (s == "relu") return FeatureMapKind::relu;
  if (s == "elu_plus_one") return FeatureMapKind::elu_plus_one;
  throw ConfigError("unknown feature map '" + s + "'");
}

std::string to_string(KernelCombination variant) {
  return variant == KernelCombination::tensor_product ? "tensor_product" : "linear_combination";
}

std::string to_string(FeatureMapKind kind) {
  switch (kind) {
    case FeatureMapKind::sigmoid: return "sigmoid";
    case FeatureMapKind::relu: return "relu";
    case FeatureMapKind::elu_plus_one: return "elu_plus_one";
  }
  return "sigmoid";
}

namespace {

double map_one(double x, FeatureMapKind kind) {
  switch (kind) {
    case FeatureMapKind::sigmoid:
      return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
    case FeatureMapKind::relu: return x > 0.0 ? x : 0.0;
    case FeatureMapKind::elu_plus_one: return x > 0.0 ? x + 1.0 : std::exp(x);
  }
  return x;
}

double map_derivative_one(double x, FeatureMapKind kind) {
  switch (kind) {
    case FeatureMapKind::sigmoid: {
      const double s = map_one(x, kind);
      return s * (1.0 - s);
    }
    case FeatureMapKind::relu: return x > 0.0 ? 1.0 : 0.0;
    case FeatureMapKind::elu_plus_one: return x > 0.0 ? 1.0 : std::exp(x);
  }
  return 1.0;
}

// Positive-pair weights A^P with the diagonal optionally removed.
Matrix positive_weights(const Matrix& coarse, const LossConfig& cfg) {
  Matrix w = coarse;
  if (!cfg.include_self_community) w.diagonal().setZero();
  return w;
}

void check_shapes(const Matrix& nodes, const Matrix& communities, const Partition& partition,
                  const Matrix& coarse) {
  if (nodes.rows() != partition.num_nodes()) {
    throw ArgumentError("loss: V has " + std::to_string(nodes.rows()) + " rows, partition covers " +
                        std::to_string(partition.num_nodes()) + " nodes");
  }
  if (communities.rows() != partition.m || coarse.rows() != partition.m ||
      coarse.cols() != partition.m) {
    throw ArgumentError("loss: community matrices must have m = " + std::to_string(partition.m) +
                        " rows");
  }
}

// Forward pass of the linear-time loss with everything the backward pass needs.
struct Forward {
  LossAggregates agg;
  Matrix positive;   // A^P used for positives
  Matrix numerator_bracket;    // TP: Σ_k A_jk K_jk s_k.  LC: Σ_k A_jk s_k
  Matrix denominator_bracket;  // TP: Σ_k K_jk s_k.       LC: unused (S is shared)
  Vector community_positive;   // LC: Σ_k A_jk K_jk w_k
  Vector community_total;      // LC: Σ_k K_jk w_k
  Vector numerators;
  Vector denominators;
  std::vector<char> clamped_mask;
  Index clamped = 0;
  double loss = 0.0;
};

Forward forward(const Matrix& nodes, const Matrix& communities, const Partition& partition,
                const Matrix& coarse, const LossConfig& cfg) {
  cfg.validate();
  check_shapes(nodes, communities, partition, coarse);
  const Index n = nodes.rows();
  const Index m = partition.m;
  const bool tensor = cfg.variant == KernelCombination::tensor_product;
  const double alpha = tensor ? 1.0 : cfg.alpha;
  const double beta = tensor ? 0.0 : 1.0 - cfg.alpha;
  const bool node_term = tensor || alpha != 0.0;

  Forward f;
  f.positive = positive_weights(coarse, cfg);
  f.agg.kernel = community_kernel(communities, cfg.tau);
  f.agg.community_weights = Vector::Zero(m);
  for (Index t = 0; t < n; ++t) f.agg.community_weights[partition.assignment[t]] += partition.weights[t];

  f.agg.mapped_nodes = feature_map(nodes, cfg.feature_map);
  f.agg.community_sums = Matrix::Zero(m, nodes.cols());
  for (Index t = 0; t < n; ++t) {
    f.agg.community_sums.row(partition.assignment[t]).noalias() +=
        partition.weights[t] * f.agg.mapped_nodes.row(t);
  }
  f.agg.global_sum = RowVector::Zero(nodes.cols());
  for (Index k = 0; k < m; ++k) f.agg.global_sum += f.agg.community_sums.row(k);

  const Matrix& phi = f.agg.mapped_nodes;
  const Matrix& s = f.agg.community_sums;
  const Matrix& K = f.agg.kernel;
  f.numerators.resize(n);
  f.denominators.resize(n);

  if (tensor) {
    f.numerator_bracket = f.positive.cwiseProduct(K) * s;
    f.denominator_bracket = K * s;
    for (Index i = 0; i < n; ++i) {
      const Index j = partition.assignment[i];
      f.numerators[i] = phi.row(i).dot(f.numerator_bracket.row(j));
      f.denominators[i] = phi.row(i).dot(f.denominator_bracket.row(j));
    }
  } else {
    f.community_positive = f.positive.cwiseProduct(K) * f.agg.community_weights;
    f.community_total = K * f.agg.community_weights;
    if (node_term) f.numerator_bracket = f.positive * s;
    for (Index i = 0; i < n; ++i) {
      const Index j = partition.assignment[i];
      double num = beta * f.community_positive[j];
      double den = beta * f.community_total[j];
      if (node_term) {
        num += alpha * phi.row(i).dot(f.numerator_bracket.row(j));
        den += alpha * phi.row(i).dot(f.agg.global_sum);
      }
      f.numerators[i] = num;
      f.denominators[i] = den;
    }
  }

  f.clamped_mask.assign(n, 0);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    double num = f.numerators[i];
    if (!(num > cfg.epsilon_clamp)) {
      num = cfg.epsilon_clamp;
      f.numerators[i] = num;
      f.clamped_mask[i] = 1;
      ++f.clamped;
    }
    const double den = f.denominators[i];
    if (!(den > 0.0) || !std::isfinite(den)) {
      throw NumericalError("loss: denominator of node " + std::to_string(i) +
                           " is not a positive finite number (" + std::to_string(den) + ")");
    }
    total += std::log(num / den);
  }
  f.loss = -total / static_cast<double>(n);
  return f;
}

FeatureGradients backward(const Forward& f, const Matrix& nodes, const Matrix& communities,
                          const Partition& partition, const LossConfig& cfg) {
  const Index n = nodes.rows();
  const Index m = partition.m;
  const Index dg = nodes.cols();
  const bool tensor = cfg.variant == KernelCombination::tensor_product;
  const double alpha = tensor ? 1.0 : cfg.alpha;
  const double beta = tensor ? 0.0 : 1.0 - cfg.alpha;
  const bool node_term = tensor || alpha != 0.0;
  const bool community_term = tensor || beta != 0.0;

  const Matrix& phi = f.agg.mapped_nodes;
  const Matrix& s = f.agg.community_sums;
  const Matrix& K = f.agg.kernel;
  const double inv_n = 1.0 / static_cast<double>(n);

  // ∂L/∂num_i and ∂L/∂den_i.
  Vector d_num(n);
  Vector d_den(n);
  for (Index i = 0; i < n; ++i) {
    d_num[i] = f.clamped_mask[i] ? 0.0 : -inv_n / f.numerators[i];
    d_den[i] = inv_n / f.denominators[i];
  }

  Matrix d_phi = Matrix::Zero(n, dg);
  Matrix d_kernel = Matrix::Zero(m, m);

  if (tensor) {
    Matrix num_pull = Matrix::Zero(m, dg);  // Σ_{i∈P_j} ∂num_i φ(v_i)
    Matrix den_pull = Matrix::Zero(m, dg);
    for (Index i = 0; i < n; ++i) {
      const Index j = partition.assignment[i];
      d_phi.row(i) = d_num[i] * f.numerator_bracket.row(j) + d_den[i] * f.denominator_bracket.row(j);
      num_pull.row(j).noalias() += d_num[i] * phi.row(i);
      den_pull.row(j).noalias() += d_den[i] * phi.row(i);
    }
    const Matrix weighted_kernel = f.positive.cwiseProduct(K);
    const Matrix d_sums = weighted_kernel.transpose() * num_pull + K.transpose() * den_pull;
    for (Index t = 0; t < n; ++t) d_phi.row(t).noalias() += partition.weights[t] * d_sums.row(partition.assignment[t]);
    d_kernel = f.positive.cwiseProduct(num_pull * s.transpose()) + den_pull * s.transpose();
  } else {
    if (node_term) {
      Matrix num_pull = Matrix::Zero(m, dg);
      RowVector den_pull = RowVector::Zero(dg);
      for (Index i = 0; i < n; ++i) {
        const Index j = partition.assignment[i];
        d_phi.row(i) = alpha * (d_num[i] * f.numerator_bracket.row(j) + d_den[i] * f.agg.global_sum);
        num_pull.row(j).noalias() += (alpha * d_num[i]) * phi.row(i);
        den_pull.noalias() += (alpha * d_den[i]) * phi.row(i);
      }
      Matrix d_sums = f.positive.transpose() * num_pull;
      d_sums.rowwise() += den_pull;
      for (Index t = 0; t < n; ++t) d_phi.row(t).noalias() += partition.weights[t] * d_sums.row(partition.assignment[t]);
    }
    if (community_term) {
      Vector pos_pull = Vector::Zero(m);
      Vector tot_pull = Vector::Zero(m);
      for (Index i = 0; i < n; ++i) {
        const Index j = partition.assignment[i];
        pos_pull[j] += beta * d_num[i];
        tot_pull[j] += beta * d_den[i];
      }
      for (Index j = 0; j < m; ++j) {
        for (Index k = 0; k < m; ++k) {
          d_kernel(j, k) = f.agg.community_weights[k] * (f.positive(j, k) * pos_pull[j] + tot_pull[j]);
        }
      }
    }
  }

  FeatureGradients g;
  if (node_term) {
    g.nodes = d_phi.cwiseProduct(feature_map_derivative(nodes, cfg.feature_map));
  } else {
    g.nodes = Matrix::Zero(n, dg);
  }

  g.communities = Matrix::Zero(m, communities.cols());
  if (community_term) {
    // K = exp(Ĉ Ĉᵀ / τ)  =>  ∂Ĉ = (G + Gᵀ) Ĉ with G = ∂K ⊙ K / τ.
    const Matrix unit = normalize_rows(communities);
    const Matrix d_gram = d_kernel.cwiseProduct(K) / cfg.tau;
    const Matrix d_unit = (d_gram + d_gram.transpose()) * unit;
    for (Index j = 0; j < m; ++j) {
      const double norm = communities.row(j).norm();
      if (norm == 0.0) continue;
      const double radial = unit.row(j).dot(d_unit.row(j));
      g.communities.row(j) = (d_unit.row(j) - radial * unit.row(j)) / norm;
    }
  }
  return g;
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw NumericalError(std::string("non-finite gradient in ") + what);
}

}  // namespace

Matrix feature_map(const Matrix& values, FeatureMapKind kind) {
  return values.unaryExpr([kind](double x) { return map_one(x, kind); });
}

Matrix feature_map_derivative(const Matrix& values, FeatureMapKind kind) {
  return values.unaryExpr([kind](double x) { return map_derivative_one(x, kind); });
}

Matrix normalize_rows(const Matrix& values) {
  Matrix out = values;
  for (Index j = 0; j < out.rows(); ++j) {
    const double norm = out.row(j).norm();
    if (norm > 0.0) out.row(j) /= norm;
  }
  return out;
}

Matrix community_kernel(const Matrix& communities, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("community_kernel: tau must be positive");
  const Matrix unit = normalize_rows(communities);
  Matrix kernel = ((unit * unit.transpose()).array() / tau).exp().matrix();
  // Mirror after exp: vectorised and scalar exp paths can round differently.
  for (Index j = 0; j < kernel.rows(); ++j) {
    for (Index k = j + 1; k < kernel.cols(); ++k) kernel(k, j) = kernel(j, k);
  }
  return kernel;
}

double loss_oracle(const Matrix& nodes, const Matrix& communities, const Partition& partition,
                   const Matrix& coarse_adjacency, const LossConfig& cfg) {
  cfg.validate();
  check_shapes(nodes, communities, partition, coarse_adjacency);
  const Index n = nodes.rows();
  const Index m = partition.m;
  const Index dg = nodes.cols();
  const Index dp = communities.cols();
  if (n > 10000) throw ArgumentError("loss_oracle is quadratic; refusing n > 10000");

  const bool tensor = cfg.variant == KernelCombination::tensor_product;
  const double alpha = cfg.alpha;
  const double beta = 1.0 - cfg.alpha;

  // Mapped node features, element by element.
  std::vector<double> phi(static_cast<std::size_t>(n * dg));
  for (Index i = 0; i < n; ++i) {
    for (Index d = 0; d < dg; ++d) phi[i * dg + d] = map_one(nodes(i, d), cfg.feature_map);
  }

  // κ_P from explicit cosine similarities.
  std::vector<double> norms(m, 0.0);
  for (Index j = 0; j < m; ++j) {
    double sq = 0.0;
    for (Index d = 0; d < dp; ++d) sq += communities(j, d) * communities(j, d);
    norms[j] = std::sqrt(sq);
  }
  std::vector<double> kappa_p(static_cast<std::size_t>(m * m));
  for (Index j = 0; j < m; ++j) {
    for (Index k = 0; k < m; ++k) {
      double cosine = 0.0;
      if (norms[j] > 0.0 && norms[k] > 0.0) {
        double dot = 0.0;
        for (Index d = 0; d < dp; ++d) dot += communities(j, d) * communities(k, d);
        cosine = dot / (norms[j] * norms[k]);
      }
      kappa_p[j * m + k] = std::exp(cosine / cfg.tau);
    }
  }

  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Index j = partition.assignment[i];
    double num = 0.0;
    double den = 0.0;
    for (Index t = 0; t < n; ++t) {
      const Index k = partition.assignment[t];
      double kappa_g = 0.0;
      for (Index d = 0; d < dg; ++d) kappa_g += phi[i * dg + d] * phi[t * dg + d];
      const double kp = kappa_p[j * m + k];
      const double kappa_b = tensor ? kp * kappa_g : alpha * kappa_g + beta * kp;
      const double weighted = partition.weights[t] * kappa_b;
      den += weighted;
      double positive = coarse_adjacency(j, k);
      if (j == k && !cfg.include_self_community) positive = 0.0;
      if (positive > 0.0) num += positive * weighted;
    }
    if (!(num > 0.0)) {
      throw UndefinedError("loss_oracle: node " + std::to_string(i) + " has no positive mass");
    }
    total += std::log(num / den);
  }
  return -total / static_cast<double>(n);
}

LossResult loss_fast(const Matrix& nodes, const Matrix& communities, const Partition& partition,
                     const Matrix& coarse_adjacency, const LossConfig& cfg) {
  Forward f = forward(nodes, communities, partition, coarse_adjacency, cfg);
  LossResult r;
  r.loss = f.loss;
  r.clamped = f.clamped;
  r.aggregates = std::move(f.agg);
  return r;
}

FeatureLossAndGrad loss_and_feature_grad(const Matrix& nodes, const Matrix& communities,
                                         const Partition& partition,
                                         const Matrix& coarse_adjacency, const LossConfig& cfg) {
  const Forward f = forward(nodes, communities, partition, coarse_adjacency, cfg);
  FeatureLossAndGrad out;
  out.loss = f.loss;
  out.clamped = f.clamped;
  out.grads = backward(f, nodes, communities, partition, cfg);
  return out;
}

LossAndGrad loss_and_grad(const FeatureOperator& features, const EncoderParams& params,
                          const Partition& partition, const Matrix& coarse_adjacency,
                          const LossConfig& cfg, const Matrix& mask) {
  const BiLevelFeatures bi = bi_level_features(features, params, partition, mask);
  const FeatureLossAndGrad inner =
      loss_and_feature_grad(bi.nodes, bi.communities, partition, coarse_adjacency, cfg);

  // c_k = Σ_t P_{t,k} (mask_t ⊙ x_t W_P)  =>  ∂(x_t W_P) = P_{t,k} mask_t ⊙ ∂c_k.
  Matrix d_projected(features.rows(), params.community_dim());
  for (Index t = 0; t < features.rows(); ++t) {
    d_projected.row(t) = partition.weights[t] *
                         inner.grads.communities.row(partition.assignment[t]).cwiseProduct(mask.row(t));
  }

  LossAndGrad out;
  out.loss = inner.loss;
  out.clamped = inner.clamped;
  out.grads.node_weights = features.transpose_times(inner.grads.nodes);
  out.grads.community_weights = features.transpose_times(d_projected);
  require_finite(out.grads.node_weights, "W_G");
  require_finite(out.grads.community_weights, "W_P");
  if (!std::isfinite(out.loss)) throw NumericalError("loss is not finite");
  return out;
}

}  // namespace dkgccl
