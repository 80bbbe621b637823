#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dkgccl/graph.hpp"
#include "dkgccl/matrix.hpp"

namespace dkgccl {

enum class WeightMode { mean, unit };
enum class CoarsenNormalization { raw, row, symmetric };

// Hard node -> community assignment with per-node aggregation weights P_{t,j}.
struct Partition {
  std::vector<Index> assignment;
  Index m = 0;
  std::vector<Index> sizes;
  std::vector<double> weights;

  Index num_nodes() const { return static_cast<Index>(assignment.size()); }

  // Compacts arbitrary ids to [0, m) in ascending id order and sets mean
  // weights.
  static Partition from_assignment(std::vector<Index> ids);

  // Node ids of every community in ascending order.
  std::vector<std::vector<Index>> members() const;
  // Σ_t P_{t,k} for every community k.
  std::vector<double> community_weight_sums() const;

  void validate(Index n) const;
};

Partition partition_graph(const SparseGraph& g, Index m, std::uint64_t seed);

// Number of undirected edges whose endpoints lie in different communities.
Index edge_cut(const SparseGraph& g, const Partition& p);

// Balanced random partition (used as a quality floor for the partitioner).
Partition random_balanced_partition(Index n, Index m, std::uint64_t seed);

Partition load_partition(const std::filesystem::path& path, Index n);
void save_partition(const std::filesystem::path& path, const Partition& p);

Partition assignment_weights(Partition p, WeightMode mode);

// m = max(1, round(rate * n)), clamped to n.
Index communities_from_rate(double rate, Index n);

struct CoarsenedGraph {
  Index m = 0;
  Matrix matrix;
  CoarsenNormalization normalization = CoarsenNormalization::raw;
};

// A^P = P^T A P with unit P entries, then the requested normalization.
CoarsenedGraph coarsen(const SparseGraph& g, const Partition& p,
                       CoarsenNormalization normalization);

WeightMode parse_weight_mode(const std::string& s);
CoarsenNormalization parse_normalization(const std::string& s);
std::string to_string(WeightMode mode);
std::string to_string(CoarsenNormalization normalization);

}  // namespace dkgccl
