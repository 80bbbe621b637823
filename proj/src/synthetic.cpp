#include "dkgccl/synthetic.hpp"

#include <cmath>
#include <random>

#include "dkgccl/errors.hpp"

namespace dkgccl {

namespace {

// Visits the selected cells of a `count`-cell grid, each cell independently
// with probability p.
template <typename F>
void sample_cells(std::uint64_t count, double p, std::mt19937_64& rng, F&& visit) {
  if (count == 0 || p <= 0.0) return;
  if (p >= 1.0) {
    for (std::uint64_t c = 0; c < count; ++c) visit(c);
    return;
  }
  std::geometric_distribution<std::uint64_t> skip(p);
  std::uint64_t cell = skip(rng);
  while (cell < count) {
    visit(cell);
    const std::uint64_t gap = skip(rng);
    if (gap >= count - cell) break;
    cell += gap + 1;
  }
}

}  // namespace

std::vector<std::pair<NodeId, NodeId>> sbm_edges(const SbmSpec& spec, std::uint64_t seed) {
  if (!(spec.p_in >= 0.0 && spec.p_in <= 1.0 && spec.p_out >= 0.0 && spec.p_out <= 1.0)) {
    throw ArgumentError("sbm: probabilities must be in [0, 1]");
  }
  std::vector<NodeId> start{0};
  for (Index s : spec.block_sizes) {
    if (s < 1) throw ArgumentError("sbm: block sizes must be positive");
    start.push_back(start.back() + s);
  }
  std::mt19937_64 rng(seed);
  std::vector<std::pair<NodeId, NodeId>> edges;
  const std::size_t blocks = spec.block_sizes.size();
  for (std::size_t a = 0; a < blocks; ++a) {
    const auto sa = static_cast<std::uint64_t>(spec.block_sizes[a]);
    // Within a block: sample the full sa × sa grid and keep the upper triangle,
    // which gives every unordered pair probability p_in.
    sample_cells(sa * sa, spec.p_in, rng, [&](std::uint64_t cell) {
      const auto i = static_cast<NodeId>(cell / sa);
      const auto j = static_cast<NodeId>(cell % sa);
      if (i < j) edges.emplace_back(start[a] + i, start[a] + j);
    });
    for (std::size_t b = a + 1; b < blocks; ++b) {
      const auto sb = static_cast<std::uint64_t>(spec.block_sizes[b]);
      sample_cells(sa * sb, spec.p_out, rng, [&](std::uint64_t cell) {
        edges.emplace_back(start[a] + static_cast<NodeId>(cell / sb),
                           start[b] + static_cast<NodeId>(cell % sb));
      });
    }
  }
  return edges;
}

Matrix class_features(const LabelVector& labels, Index dim, double signal, std::uint64_t seed) {
  if (dim < 1) throw ArgumentError("class_features: dim must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix means(std::max(labels.num_classes, 1), dim);
  for (Index i = 0; i < means.size(); ++i) means.data()[i] = signal * normal(rng);
  Matrix x(labels.size(), dim);
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index d = 0; d < dim; ++d) x(i, d) = means(labels.labels[i], d) + normal(rng);
  }
  return x;
}

SyntheticGraph make_sbm(const SbmSpec& spec, Index feature_dim, double signal, std::uint64_t seed) {
  std::vector<int> ids;
  for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) {
    ids.insert(ids.end(), static_cast<std::size_t>(spec.block_sizes[b]), static_cast<int>(b));
  }
  SyntheticGraph out;
  out.labels = LabelVector::from_labels(std::move(ids));
  const auto edges = sbm_edges(spec, seed);
  out.graph = SparseGraph(edges, class_features(out.labels, feature_dim, signal, seed ^ 0x9e3779b97f4a7c15ULL));
  return out;
}

SbmSpec balanced_sbm(Index n, Index blocks, double p_in, double p_out) {
  if (blocks < 1 || n < blocks) throw ArgumentError("balanced_sbm: need 1 <= blocks <= n");
  SbmSpec spec;
  spec.p_in = p_in;
  spec.p_out = p_out;
  for (Index b = 0; b < blocks; ++b) spec.block_sizes.push_back(n / blocks + (b < n % blocks ? 1 : 0));
  return spec;
}

SbmSpec sbm_with_degree(Index n, Index blocks, double mean_degree, double intra_fraction) {
  SbmSpec spec = balanced_sbm(n, blocks, 0.0, 0.0);
  const double block = static_cast<double>(n) / static_cast<double>(blocks);
  const double outside = static_cast<double>(n) - block;
  spec.p_in = std::min(1.0, mean_degree * intra_fraction / std::max(block - 1.0, 1.0));
  spec.p_out = outside > 0.0 ? std::min(1.0, mean_degree * (1.0 - intra_fraction) / outside) : 0.0;
  return spec;
}

}  // namespace dkgccl
