#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dkgccl/graph.hpp"

namespace dkgccl {

// Stochastic block model: each pair inside a block is an edge with
// probability p_in, each pair across blocks with probability p_out.
struct SbmSpec {
  std::vector<Index> block_sizes;
  double p_in = 0.1;
  double p_out = 0.01;
};

// Edges with u < v, generated by geometric skipping so the cost is linear in
// the number of edges rather than the number of pairs.
std::vector<std::pair<NodeId, NodeId>> sbm_edges(const SbmSpec& spec, std::uint64_t seed);

// Gaussian class-conditional features: row i is mu_{y_i} + noise, with class
// means drawn from N(0, signal²) and noise from N(0, 1).
Matrix class_features(const LabelVector& labels, Index dim, double signal, std::uint64_t seed);

struct SyntheticGraph {
  SparseGraph graph;
  LabelVector labels;  // block ids
};

SyntheticGraph make_sbm(const SbmSpec& spec, Index feature_dim, double signal, std::uint64_t seed);

// Equal-size blocks: `blocks` blocks covering n nodes (sizes differ by at most one).
SbmSpec balanced_sbm(Index n, Index blocks, double p_in, double p_out);

// Block probabilities giving roughly the requested mean degree, with
// `intra_fraction` of a node's expected edges inside its own block.
SbmSpec sbm_with_degree(Index n, Index blocks, double mean_degree, double intra_fraction);

}  // namespace dkgccl
