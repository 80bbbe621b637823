#include "dkgccl/graph.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dkgccl/errors.hpp"
#include "dkgccl/io.hpp"

namespace dkgccl {

Matrix CsrMatrix::multiply(const Matrix& dense) const {
  if (dense.rows() != cols) {
    throw ArgumentError("CsrMatrix::multiply: expected " + std::to_string(cols) + " rows, got " +
                        std::to_string(dense.rows()));
  }
  Matrix out = Matrix::Zero(rows, dense.cols());
  for (Index i = 0; i < rows; ++i) {
    auto out_row = out.row(i);
    for (Index e = row_offsets[i]; e < row_offsets[i + 1]; ++e) {
      out_row.noalias() += values[e] * dense.row(col_indices[e]);
    }
  }
  return out;
}

Matrix CsrMatrix::to_dense() const {
  Matrix out = Matrix::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index e = row_offsets[i]; e < row_offsets[i + 1]; ++e) out(i, col_indices[e]) += values[e];
  }
  return out;
}

SparseGraph::SparseGraph(std::span<const std::pair<NodeId, NodeId>> edges, Matrix features)
    : n_(features.rows()),
      touches_(std::make_shared<std::atomic<std::uint64_t>>(0)),
      features_(std::move(features)) {
  std::vector<std::pair<Index, Index>> directed;
  directed.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n_ || v >= n_) {
      throw InputError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                       ") references a node outside [0, " + std::to_string(n_) + ")");
    }
    if (u == v) continue;
    directed.emplace_back(u, v);
    directed.emplace_back(v, u);
  }
  std::sort(directed.begin(), directed.end());
  directed.erase(std::unique(directed.begin(), directed.end()), directed.end());

  auto s = std::make_shared<Structure>();
  s->row_offsets.assign(n_ + 1, 0);
  s->col_indices.reserve(directed.size());
  for (const auto& [u, v] : directed) {
    ++s->row_offsets[u + 1];
    s->col_indices.push_back(v);
  }
  std::partial_sum(s->row_offsets.begin(), s->row_offsets.end(), s->row_offsets.begin());
  adj_ = std::move(s);
}

std::span<const Index> SparseGraph::row_offsets() const {
  touch();
  return adj_->row_offsets;
}

std::span<const Index> SparseGraph::col_indices() const {
  touch();
  return adj_->col_indices;
}

std::span<const Index> SparseGraph::neighbors(Index v) const {
  touch();
  const auto begin = adj_->row_offsets[v];
  const auto end = adj_->row_offsets[v + 1];
  return std::span<const Index>(adj_->col_indices.data() + begin, end - begin);
}

Index SparseGraph::degree(Index v) const {
  touch();
  return adj_->row_offsets[v + 1] - adj_->row_offsets[v];
}

SparseGraph SparseGraph::with_features(Matrix features) const {
  if (features.rows() != n_) {
    throw ArgumentError("with_features: expected " + std::to_string(n_) + " rows");
  }
  SparseGraph copy = *this;
  copy.features_ = std::move(features);
  return copy;
}

std::vector<std::pair<NodeId, NodeId>> SparseGraph::edge_list() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  if (!adj_) return out;
  touch();
  out.reserve(adj_->col_indices.size() / 2);
  for (Index u = 0; u < n_; ++u) {
    for (Index e = adj_->row_offsets[u]; e < adj_->row_offsets[u + 1]; ++e) {
      const Index v = adj_->col_indices[e];
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

bool operator==(const SparseGraph& a, const SparseGraph& b) {
  if (a.n_ != b.n_ || a.features_.rows() != b.features_.rows() ||
      a.features_.cols() != b.features_.cols()) {
    return false;
  }
  if (static_cast<bool>(a.adj_) != static_cast<bool>(b.adj_)) return false;
  if (a.adj_ && (a.adj_->row_offsets != b.adj_->row_offsets ||
                 a.adj_->col_indices != b.adj_->col_indices)) {
    return false;
  }
  return std::equal(a.features_.data(), a.features_.data() + a.features_.size(),
                    b.features_.data(), [](double x, double y) {
                      return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y);
                    });
}

LabelVector LabelVector::from_labels(std::vector<int> labels) {
  LabelVector out;
  out.num_classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  out.labels = std::move(labels);
  return out;
}

void LabelVector::validate(Index n, bool for_evaluation) const {
  if (size() != n) {
    throw InputError("label count " + std::to_string(size()) + " != node count " +
                     std::to_string(n));
  }
  for (int l : labels) {
    if (l < 0 || l >= num_classes) throw InputError("label " + std::to_string(l) + " out of range");
  }
  if (for_evaluation && num_classes < 2) throw InputError("evaluation needs at least 2 classes");
}

void SplitSpec::validate(Index n) const {
  std::vector<char> seen(n, 0);
  for (const auto* part : {&train, &valid, &test}) {
    for (Index i : *part) {
      if (i < 0 || i >= n) throw InputError("split index " + std::to_string(i) + " out of range");
      if (seen[i]) throw InputError("split index " + std::to_string(i) + " appears twice");
      seen[i] = 1;
    }
  }
}

SplitSpec random_split(const LabelVector& labels, Index per_class, Index num_valid, Index num_test,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Index> order(labels.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  SplitSpec split;
  std::vector<Index> taken(labels.num_classes, 0);
  std::vector<Index> rest;
  for (Index i : order) {
    const int c = labels.labels[i];
    if (taken[c] < per_class) {
      ++taken[c];
      split.train.push_back(i);
    } else {
      rest.push_back(i);
    }
  }
  const Index nv = std::min<Index>(num_valid, static_cast<Index>(rest.size()));
  const Index nt = std::min<Index>(num_test, static_cast<Index>(rest.size()) - nv);
  split.valid.assign(rest.begin(), rest.begin() + nv);
  split.test.assign(rest.begin() + nv, rest.begin() + nv + nt);
  return split;
}

SparseGraph load_graph(const std::filesystem::path& edge_path,
                       const std::filesystem::path& feature_path) {
  const auto edges = io::read_edge_list(edge_path);
  Matrix features = io::read_matrix(feature_path);
  return SparseGraph(edges, std::move(features));
}

void save_graph(const SparseGraph& g, const std::filesystem::path& edge_path,
                const std::filesystem::path& feature_path) {
  std::string text;
  for (const auto& [u, v] : g.edge_list()) {
    text += std::to_string(u);
    text += ' ';
    text += std::to_string(v);
    text += '\n';
  }
  io::write_text(edge_path, text);
  io::write_matrix(feature_path, g.features());
}

CsrMatrix normalized_adjacency(const SparseGraph& g) {
  const Index n = g.num_nodes();
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();

  std::vector<double> inv_sqrt(n);
  for (Index i = 0; i < n; ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(static_cast<double>(offsets[i + 1] - offsets[i] + 1));
  }

  CsrMatrix out;
  out.rows = out.cols = n;
  out.row_offsets.assign(n + 1, 0);
  out.col_indices.reserve(cols.size() + n);
  out.values.reserve(cols.size() + n);
  for (Index i = 0; i < n; ++i) {
    bool diagonal_done = false;
    for (Index e = offsets[i]; e < offsets[i + 1]; ++e) {
      const Index j = cols[e];
      if (!diagonal_done && j > i) {
        out.col_indices.push_back(i);
        out.values.push_back(inv_sqrt[i] * inv_sqrt[i]);
        diagonal_done = true;
      }
      out.col_indices.push_back(j);
      out.values.push_back(inv_sqrt[i] * inv_sqrt[j]);
    }
    if (!diagonal_done) {
      out.col_indices.push_back(i);
      out.values.push_back(inv_sqrt[i] * inv_sqrt[i]);
    }
    out.row_offsets[i + 1] = static_cast<Index>(out.col_indices.size());
  }
  return out;
}

Matrix k_hop_mean(const CsrMatrix& adjacency, const Matrix& values, int hops) {
  if (hops < 1) throw ArgumentError("k_hop_mean: hops must be >= 1");
  Matrix power = adjacency.multiply(values);
  Matrix sum = power;
  for (int k = 2; k <= hops; ++k) {
    power = adjacency.multiply(power);
    sum += power;
  }
  sum /= static_cast<double>(hops);
  return sum;
}

double node_homophily(const SparseGraph& g, const LabelVector& labels, Index v) {
  const auto nbrs = g.neighbors(v);
  if (nbrs.empty()) {
    throw UndefinedError("homophily undefined for isolated node " + std::to_string(v));
  }
  const int own = labels.labels[v];
  const auto same = std::count_if(nbrs.begin(), nbrs.end(),
                                  [&](Index u) { return labels.labels[u] == own; });
  return static_cast<double>(same) / static_cast<double>(nbrs.size());
}

double edge_homophily(const SparseGraph& g, const LabelVector& labels) {
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  if (cols.empty()) return 0.0;
  Index same = 0;
  for (Index u = 0; u < g.num_nodes(); ++u) {
    for (Index e = offsets[u]; e < offsets[u + 1]; ++e) same += labels.labels[u] == labels.labels[cols[e]];
  }
  return static_cast<double>(same) / static_cast<double>(cols.size());
}

}  // namespace dkgccl
