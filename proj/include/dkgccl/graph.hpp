#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "dkgccl/matrix.hpp"

namespace dkgccl {

// Compressed sparse row matrix with explicit values. Used for the normalized
// adjacency; products accumulate each output row sequentially in column order.
struct CsrMatrix {
  Index rows = 0;
  Index cols = 0;
  std::vector<Index> row_offsets{0};
  std::vector<Index> col_indices;
  std::vector<double> values;

  Index nnz() const { return static_cast<Index>(col_indices.size()); }

  // this * dense
  Matrix multiply(const Matrix& dense) const;
  Matrix to_dense() const;
};

// Undirected, unweighted graph G = (A, X): symmetric CSR adjacency without
// self-loops plus a dense row-per-node feature matrix.
//
// Adjacency reads through the public accessors are counted so that callers can
// prove a code path never consults the graph structure (the distilled
// inference path relies on this).
class SparseGraph {
 public:
  SparseGraph() = default;

  // Builds from an undirected edge list over nodes [0, features.rows()).
  // Reversed and duplicate pairs are merged; self-loops are dropped.
  // Throws InputError when an endpoint is out of range.
  SparseGraph(std::span<const std::pair<NodeId, NodeId>> edges, Matrix features);

  Index num_nodes() const { return n_; }
  // Undirected edge count (each {u, v} once).
  Index num_edges() const { return adj_ ? static_cast<Index>(adj_->col_indices.size()) / 2 : 0; }
  Index feature_dim() const { return features_.cols(); }

  const Matrix& features() const { return features_; }

  std::span<const Index> row_offsets() const;
  std::span<const Index> col_indices() const;
  std::span<const Index> neighbors(Index v) const;
  Index degree(Index v) const;

  // Number of adjacency accessor calls made on this graph or any copy that
  // shares its structure.
  std::uint64_t adjacency_touches() const { return touches_ ? touches_->load() : 0; }

  // Same structure, new feature matrix (row count must match).
  SparseGraph with_features(Matrix features) const;

  // Undirected edges as (u, v) with u < v in CSR order.
  std::vector<std::pair<NodeId, NodeId>> edge_list() const;

  friend bool operator==(const SparseGraph& a, const SparseGraph& b);

 private:
  struct Structure {
    std::vector<Index> row_offsets;
    std::vector<Index> col_indices;
  };

  void touch() const {
    if (touches_) touches_->fetch_add(1, std::memory_order_relaxed);
  }

  Index n_ = 0;
  std::shared_ptr<const Structure> adj_;
  std::shared_ptr<std::atomic<std::uint64_t>> touches_;
  Matrix features_;
};

struct LabelVector {
  std::vector<int> labels;
  int num_classes = 0;

  Index size() const { return static_cast<Index>(labels.size()); }

  // Infers the class count as max label + 1.
  static LabelVector from_labels(std::vector<int> labels);
  void validate(Index n, bool for_evaluation = false) const;
};

struct SplitSpec {
  std::vector<Index> train;
  std::vector<Index> valid;
  std::vector<Index> test;

  void validate(Index n) const;
};

// Random split with `per_class` training nodes of every class, then
// `num_valid` validation and `num_test` test nodes drawn from the rest.
SplitSpec random_split(const LabelVector& labels, Index per_class, Index num_valid, Index num_test,
                       std::uint64_t seed);

// Edge list file: one "u v" pair per line. Features: CSV or binary matrix
// (chosen by the ".bin" extension). Node count is the feature row count.
SparseGraph load_graph(const std::filesystem::path& edge_path,
                       const std::filesystem::path& feature_path);
// Writes edges as text and features in the format implied by the extension.
void save_graph(const SparseGraph& g, const std::filesystem::path& edge_path,
                const std::filesystem::path& feature_path);

// Ã = D̃^{-1/2} (A + I) D̃^{-1/2}, where D̃ counts the added self-loop.
CsrMatrix normalized_adjacency(const SparseGraph& g);

// (1/K) Σ_{k=1..K} Ã^k V via K sparse-dense products.
Matrix k_hop_mean(const CsrMatrix& adjacency, const Matrix& values, int hops);

// Fraction of v's neighbours that share v's label. Throws UndefinedError for
// isolated nodes.
double node_homophily(const SparseGraph& g, const LabelVector& labels, Index v);

// Edge-weighted homophily over all edges (fraction of same-label edges).
double edge_homophily(const SparseGraph& g, const LabelVector& labels);

}  // namespace dkgccl
