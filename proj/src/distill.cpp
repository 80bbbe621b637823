#include "dkgccl/distill.hpp"

#include <fstream>
#include <random>

#include "dkgccl/encoder.hpp"
#include "dkgccl/errors.hpp"

namespace dkgccl {

void DistillMlp::validate() const {
  if (b1.size() != w1.cols() || w2.rows() != w1.cols() || b2.size() != w2.cols()) {
    throw ArgumentError("DistillMlp: inconsistent parameter shapes");
  }
  if (output_dim() != input_dim()) {
    throw ArgumentError("DistillMlp: output dimension must equal input dimension");
  }
}

DistillMlp init_mlp(Index dim, Index hidden, std::uint64_t seed) {
  if (dim < 1 || hidden < 1) throw ArgumentError("init_mlp: dimensions must be positive");
  std::mt19937_64 rng(seed);
  DistillMlp mlp;
  mlp.w1 = glorot_uniform(dim, hidden, rng);
  mlp.b1 = RowVector::Zero(hidden);
  mlp.w2 = glorot_uniform(hidden, dim, rng);
  mlp.b2 = RowVector::Zero(dim);
  return mlp;
}

void save_mlp(const std::filesystem::path& path, const DistillMlp& mlp,
              std::optional<std::uint64_t> digest) {
  mlp.validate();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  const std::uint64_t header[2] = {static_cast<std::uint64_t>(mlp.input_dim()),
                                   static_cast<std::uint64_t>(mlp.hidden_dim())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  auto put = [&](const double* data, Index size) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(size * sizeof(double)));
  };
  put(mlp.w1.data(), mlp.w1.size());
  put(mlp.b1.data(), mlp.b1.size());
  put(mlp.w2.data(), mlp.w2.size());
  put(mlp.b2.data(), mlp.b2.size());
  if (digest) out.write(reinterpret_cast<const char*>(&*digest), sizeof(std::uint64_t));
}

DistillMlp load_mlp(const std::filesystem::path& path, std::optional<std::uint64_t>* digest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::uint64_t header[2] = {0, 0};
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw InputError(path.string() + ": truncated mlp header");
  const std::uint64_t d = header[0];
  const std::uint64_t h = header[1];
  const std::uint64_t payload = (2 * d * h + h + d) * sizeof(double);
  const auto size = std::filesystem::file_size(path);
  const bool has_digest = size == sizeof(header) + payload + sizeof(std::uint64_t);
  if (size != sizeof(header) + payload && !has_digest) {
    throw InputError(path.string() + ": size does not match mlp header");
  }
  DistillMlp mlp;
  mlp.w1.resize(static_cast<Index>(d), static_cast<Index>(h));
  mlp.b1.resize(static_cast<Index>(h));
  mlp.w2.resize(static_cast<Index>(h), static_cast<Index>(d));
  mlp.b2.resize(static_cast<Index>(d));
  auto get = [&](double* data, Index count) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
  };
  get(mlp.w1.data(), mlp.w1.size());
  get(mlp.b1.data(), mlp.b1.size());
  get(mlp.w2.data(), mlp.w2.size());
  get(mlp.b2.data(), mlp.b2.size());
  std::uint64_t stored = 0;
  if (has_digest) in.read(reinterpret_cast<char*>(&stored), sizeof(stored));
  if (!in) throw InputError(path.string() + ": truncated mlp payload");
  if (digest) *digest = has_digest ? std::optional<std::uint64_t>(stored) : std::nullopt;
  return mlp;
}

Matrix propagation_target(const SparseGraph& g, const Matrix& node_weights, int hops) {
  const FeatureOperator x(g.features());
  return k_hop_mean(normalized_adjacency(g), x.times(node_weights), hops);
}

namespace {

void check_input(const DistillMlp& mlp, const Matrix& inputs) {
  mlp.validate();
  if (inputs.cols() != mlp.input_dim()) {
    throw ArgumentError("mlp: input has " + std::to_string(inputs.cols()) + " columns, expected " +
                        std::to_string(mlp.input_dim()));
  }
}

}  // namespace

Matrix mlp_forward(const DistillMlp& mlp, const Matrix& inputs) {
  check_input(mlp, inputs);
  Matrix hidden = inputs * mlp.w1;
  hidden.rowwise() += mlp.b1;
  hidden = hidden.cwiseMax(0.0);
  Matrix out = hidden * mlp.w2;
  out.rowwise() += mlp.b2;
  return out;
}

DistillLossAndGrad distill_loss_and_grad(const DistillMlp& mlp, const Matrix& inputs,
                                         const Matrix& target) {
  check_input(mlp, inputs);
  if (target.rows() != inputs.rows() || target.cols() != mlp.output_dim()) {
    throw ArgumentError("distill: target shape does not match MLP output");
  }
  Matrix pre = inputs * mlp.w1;
  pre.rowwise() += mlp.b1;
  const Matrix hidden = pre.cwiseMax(0.0);
  Matrix out = hidden * mlp.w2;
  out.rowwise() += mlp.b2;

  const Matrix residual = out - target;
  DistillLossAndGrad r;
  r.loss = residual.squaredNorm();

  const Matrix d_out = 2.0 * residual;
  r.grads.w2 = hidden.transpose() * d_out;
  r.grads.b2 = d_out.colwise().sum();
  const Matrix d_hidden =
      (d_out * mlp.w2.transpose()).cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
  r.grads.w1 = inputs.transpose() * d_hidden;
  r.grads.b1 = d_hidden.colwise().sum();
  return r;
}

Activation parse_activation(const std::string& s) {
  if (s == "identity") return Activation::identity;
  if (s == "relu") return Activation::relu;
  if (s == "prelu") return Activation::prelu;
  throw ConfigError("unknown activation '" + s + "'");
}

std::string to_string(Activation a) {
  switch (a) {
    case Activation::identity: return "identity";
    case Activation::relu: return "relu";
    case Activation::prelu: return "prelu";
  }
  return "relu";
}

Matrix apply_activation(const Matrix& values, Activation a) {
  switch (a) {
    case Activation::identity: return values;
    case Activation::relu: return values.cwiseMax(0.0);
    case Activation::prelu:
      return values.unaryExpr([](double x) { return x > 0.0 ? x : 0.25 * x; });
  }
  return values;
}

FinalRepresentation final_representation(const SparseGraph& g, const Matrix& node_weights,
                                         const DistillMlp* mlp, int hops, Activation sigma) {
  const FeatureOperator x(g.features());
  const Matrix v = x.times(node_weights);
  FinalRepresentation out;
  if (mlp) {
    out.source = RepresentationSource::distilled;
    out.z = apply_activation(v + mlp_forward(*mlp, v), sigma);
  } else {
    out.source = RepresentationSource::gnn_propagated;
    out.z = apply_activation(v + k_hop_mean(normalized_adjacency(g), v, hops), sigma);
  }
  if (!out.z.allFinite()) throw NumericalError("final representation is not finite");
  return out;
}

}  // namespace dkgccl
