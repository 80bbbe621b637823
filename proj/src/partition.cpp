#include "dkgccl/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <string>

#include "dkgccl/errors.hpp"
#include "dkgccl/io.hpp"

namespace dkgccl {

// ---------------------------------------------------------------------------
// Partition bookkeeping

Partition Partition::from_assignment(std::vector<Index> ids) {
  std::vector<Index> distinct = ids;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  Partition p;
  p.m = static_cast<Index>(distinct.size());
  p.sizes.assign(p.m, 0);
  p.assignment.resize(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const Index c = std::lower_bound(distinct.begin(), distinct.end(), ids[i]) - distinct.begin();
    p.assignment[i] = c;
    ++p.sizes[c];
  }
  return assignment_weights(std::move(p), WeightMode::mean);
}

std::vector<std::vector<Index>> Partition::members() const {
  std::vector<std::vector<Index>> out(m);
  for (Index k = 0; k < m; ++k) out[k].reserve(sizes[k]);
  for (Index i = 0; i < num_nodes(); ++i) out[assignment[i]].push_back(i);
  return out;
}

std::vector<double> Partition::community_weight_sums() const {
  std::vector<double> sums(m, 0.0);
  for (Index i = 0; i < num_nodes(); ++i) sums[assignment[i]] += weights[i];
  return sums;
}

void Partition::validate(Index n) const {
  if (num_nodes() != n) {
    throw InputError("partition covers " + std::to_string(num_nodes()) + " nodes, graph has " +
                     std::to_string(n));
  }
  if (static_cast<Index>(sizes.size()) != m || static_cast<Index>(weights.size()) != n) {
    throw InputError("partition arrays have inconsistent lengths");
  }
  std::vector<Index> counted(m, 0);
  for (Index i = 0; i < n; ++i) {
    if (assignment[i] < 0 || assignment[i] >= m) throw InputError("community id out of range");
    if (!(weights[i] > 0.0)) throw InputError("aggregation weights must be positive");
    ++counted[assignment[i]];
  }
  if (counted != sizes) throw InputError("partition sizes do not match assignment");
  for (Index s : sizes) {
    if (s == 0) throw InputError("partition has an empty community");
  }
}

Partition assignment_weights(Partition p, WeightMode mode) {
  p.weights.assign(p.num_nodes(), 1.0);
  if (mode == WeightMode::mean) {
    for (Index i = 0; i < p.num_nodes(); ++i) {
      p.weights[i] = 1.0 / static_cast<double>(p.sizes[p.assignment[i]]);
    }
  }
  return p;
}

Index communities_from_rate(double rate, Index n) {
  if (!(rate > 0.0)) throw ArgumentError("partition rate must be positive");
  const auto m = static_cast<Index>(std::llround(rate * static_cast<double>(n)));
  return std::clamp<Index>(m, 1, std::max<Index>(n, 1));
}

Index edge_cut(const SparseGraph& g, const Partition& p) {
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  Index cut = 0;
  for (Index u = 0; u < g.num_nodes(); ++u) {
    for (Index e = offsets[u]; e < offsets[u + 1]; ++e) {
      const Index v = cols[e];
      if (u < v && p.assignment[u] != p.assignment[v]) ++cut;
    }
  }
  return cut;
}

Partition random_balanced_partition(Index n, Index m, std::uint64_t seed) {
  if (m < 1 || m > n) throw ArgumentError("random_balanced_partition: need 1 <= m <= n");
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<Index> ids(n);
  for (Index i = 0; i < n; ++i) ids[order[i]] = i % m;
  return Partition::from_assignment(std::move(ids));
}

Partition load_partition(const std::filesystem::path& path, Index n) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<Index> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      const long long v = std::stoll(line, &used);
      if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("");
      ids.push_back(v);
    } catch (const std::logic_error&) {
      throw ParseError(path.string() + ": bad community id '" + line + "'");
    }
  }
  if (static_cast<Index>(ids.size()) != n) {
    throw InputError(path.string() + ": expected " + std::to_string(n) + " lines, found " +
                     std::to_string(ids.size()));
  }
  return Partition::from_assignment(std::move(ids));
}

void save_partition(const std::filesystem::path& path, const Partition& p) {
  std::string text;
  for (Index c : p.assignment) {
    text += std::to_string(c);
    text += '\n';
  }
  io::write_text(path, text);
}

CoarsenedGraph coarsen(const SparseGraph& g, const Partition& p,
                       CoarsenNormalization normalization) {
  CoarsenedGraph out;
  out.m = p.m;
  out.normalization = normalization;
  out.matrix = Matrix::Zero(p.m, p.m);
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  for (Index u = 0; u < g.num_nodes(); ++u) {
    const Index cu = p.assignment[u];
    for (Index e = offsets[u]; e < offsets[u + 1]; ++e) out.matrix(cu, p.assignment[cols[e]]) += 1.0;
  }
  if (normalization == CoarsenNormalization::raw) return out;

  const Vector row_sums = out.matrix.rowwise().sum();
  if (normalization == CoarsenNormalization::row) {
    for (Index j = 0; j < p.m; ++j) {
      if (row_sums[j] > 0.0) out.matrix.row(j) /= row_sums[j];
    }
  } else {
    Vector scale(p.m);
    for (Index j = 0; j < p.m; ++j) scale[j] = row_sums[j] > 0.0 ? 1.0 / std::sqrt(row_sums[j]) : 0.0;
    for (Index j = 0; j < p.m; ++j) {
      for (Index k = 0; k < p.m; ++k) out.matrix(j, k) *= scale[j] * scale[k];
    }
  }
  return out;
}

WeightMode parse_weight_mode(const std::string& s) {
  if (s == "mean") return WeightMode::mean;
  if (s == "unit") return WeightMode::unit;
  throw ConfigError("unknown weight mode '" + s + "' (expected mean|unit)");
}

CoarsenNormalization parse_normalization(const std::string& s) {
  if (s == "raw") return CoarsenNormalization::raw;
  if (s == "row") return CoarsenNormalization::row;
  if (s == "symmetric") return CoarsenNormalization::symmetric;
  throw ConfigError("unknown normalization '" + s + "' (expected raw|row|symmetric)");
}

std::string to_string(WeightMode mode) { return mode == WeightMode::mean ? "mean" : "unit"; }

std::string to_string(CoarsenNormalization normalization) {
  switch (normalization) {
    case CoarsenNormalization::raw: return "raw";
    case CoarsenNormalization::row: return "row";
    case CoarsenNormalization::symmetric: return "symmetric";
  }
  return "raw";
}

// ---------------------------------------------------------------------------
// Multilevel k-way partitioner: heavy-edge matching coarsening, greedy graph
// growing on the coarsest level, boundary refinement while uncoarsening.

namespace {

struct WeightedGraph {
  Index n = 0;
  std::vector<Index> xadj{0};
  std::vector<Index> adjncy;
  std::vector<Index> adjwgt;
  std::vector<Index> vwgt;

  Index total_weight() const { return std::accumulate(vwgt.begin(), vwgt.end(), Index{0}); }
};

struct Level {
  WeightedGraph graph;
  std::vector<Index> fine_to_coarse;  // maps vertices of the finer level
};

WeightedGraph from_sparse(const SparseGraph& g) {
  WeightedGraph w;
  w.n = g.num_nodes();
  const auto offsets = g.row_offsets();
  const auto cols = g.col_indices();
  w.xadj.assign(offsets.begin(), offsets.end());
  w.adjncy.assign(cols.begin(), cols.end());
  w.adjwgt.assign(cols.size(), 1);
  w.vwgt.assign(w.n, 1);
  return w;
}

// One round of heavy-edge matching. Returns false when it made too little
// progress to be worth another level.
bool coarsen_once(const WeightedGraph& fine, Index target, Index max_vertex_weight,
                  std::mt19937_64& rng, Level& level) {
  std::vector<Index> order(fine.n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Index> match(fine.n, -1);
  Index remaining = fine.n;
  for (Index v : order) {
    if (match[v] != -1) continue;
    if (remaining <= target) {
      match[v] = v;
      continue;
    }
    Index best = -1;
    Index best_weight = 0;
    for (Index e = fine.xadj[v]; e < fine.xadj[v + 1]; ++e) {
      const Index u = fine.adjncy[e];
      if (match[u] != -1 || fine.vwgt[v] + fine.vwgt[u] > max_vertex_weight) continue;
      if (fine.adjwgt[e] > best_weight) {
        best = u;
        best_weight = fine.adjwgt[e];
      }
    }
    if (best >= 0) {
      match[v] = best;
      match[best] = v;
      --remaining;
    } else {
      match[v] = v;
    }
  }

  if (remaining > fine.n - std::max<Index>(1, fine.n / 20)) return false;

  auto& cmap = level.fine_to_coarse;
  cmap.assign(fine.n, -1);
  Index next = 0;
  for (Index v = 0; v < fine.n; ++v) {
    if (cmap[v] != -1) continue;
    cmap[v] = next;
    cmap[match[v]] = next;
    ++next;
  }

  WeightedGraph& coarse = level.graph;
  coarse.n = next;
  coarse.vwgt.assign(next, 0);
  coarse.xadj.assign(1, 0);
  coarse.adjncy.clear();
  coarse.adjwgt.clear();
  for (Index v = 0; v < fine.n; ++v) coarse.vwgt[cmap[v]] += fine.vwgt[v];

  std::vector<std::vector<Index>> groups(next);
  for (Index v = 0; v < fine.n; ++v) groups[cmap[v]].push_back(v);

  std::vector<Index> slot(next, -1);
  for (Index c = 0; c < next; ++c) {
    const Index row_begin = static_cast<Index>(coarse.adjncy.size());
    for (Index v : groups[c]) {
      for (Index e = fine.xadj[v]; e < fine.xadj[v + 1]; ++e) {
        const Index cu = cmap[fine.adjncy[e]];
        if (cu == c) continue;
        if (slot[cu] < row_begin) {
          slot[cu] = static_cast<Index>(coarse.adjncy.size());
          coarse.adjncy.push_back(cu);
          coarse.adjwgt.push_back(fine.adjwgt[e]);
        } else {
          coarse.adjwgt[slot[cu]] += fine.adjwgt[e];
        }
      }
    }
    coarse.xadj.push_back(static_cast<Index>(coarse.adjncy.size()));
  }
  return true;
}

// Greedy graph growing: parts are grown one at a time from a peripheral seed,
// always absorbing the frontier vertex most strongly tied to the part.
std::vector<Index> grow_initial_parts(const WeightedGraph& g, Index m, std::mt19937_64& rng) {
  std::vector<Index> part(g.n, -1);
  std::vector<Index> order(g.n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Index> tie_to_assigned(g.n, 0);
  std::vector<Index> tie_to_current(g.n, 0);
  Index unassigned = g.n;
  Index remaining_weight = g.total_weight();

  for (Index k = 0; k < m; ++k) {
    const Index parts_left = m - k;
    if (parts_left == 1) {
      for (Index v = 0; v < g.n; ++v) {
        if (part[v] == -1) part[v] = k;
      }
      break;
    }
    const double target = static_cast<double>(remaining_weight) / static_cast<double>(parts_left);

    auto pick_seed = [&]() {
      Index best = -1;
      for (Index v : order) {
        if (part[v] != -1) continue;
        if (best == -1 || tie_to_assigned[v] < tie_to_assigned[best]) best = v;
      }
      return best;
    };

    using Entry = std::pair<Index, Index>;  // (tie weight, -order position)
    std::priority_queue<Entry> frontier;
    std::vector<Index> position(g.n);
    for (Index i = 0; i < g.n; ++i) position[order[i]] = i;
    std::vector<Index> touched;

    Index weight = 0;
    auto absorb = [&](Index v) {
      part[v] = k;
      --unassigned;
      weight += g.vwgt[v];
      remaining_weight -= g.vwgt[v];
      for (Index e = g.xadj[v]; e < g.xadj[v + 1]; ++e) {
        const Index u = g.adjncy[e];
        tie_to_assigned[u] += g.adjwgt[e];
        if (part[u] != -1) continue;
        if (tie_to_current[u] == 0) touched.push_back(u);
        tie_to_current[u] += g.adjwgt[e];
        frontier.emplace(tie_to_current[u], -position[u]);
      }
    };

    // Leave at least one vertex for each later part.
    while (static_cast<double>(weight) < target && unassigned > parts_left - 1) {
      Index next = -1;
      while (!frontier.empty()) {
        const auto [tie, neg_pos] = frontier.top();
        frontier.pop();
        const Index v = order[-neg_pos];
        if (part[v] == -1 && tie == tie_to_current[v]) {
          next = v;
          break;
        }
      }
      if (next == -1) next = pick_seed();
      if (next == -1) break;
      // Stop before a heavy vertex overshoots the target by more than it fills.
      if (weight > 0 && static_cast<double>(weight + g.vwgt[next]) - target >
                            target - static_cast<double>(weight)) {
        break;
      }
      absorb(next);
    }
    for (Index u : touched) tie_to_current[u] = 0;
  }
  return part;
}

// Boundary refinement: greedy single-vertex moves that reduce the cut, plus
// forced moves out of parts heavier than the balance limit.
void refine(const WeightedGraph& g, Index m, std::vector<Index>& part, Index max_part_weight,
            int passes) {
  std::vector<Index> part_weight(m, 0);
  std::vector<Index> part_count(m, 0);
  for (Index v = 0; v < g.n; ++v) {
    part_weight[part[v]] += g.vwgt[v];
    ++part_count[part[v]];
  }

  std::vector<Index> tie(m, 0);
  std::vector<Index> seen_parts;
  for (int pass = 0; pass < passes; ++pass) {
    Index moves = 0;
    for (Index v = 0; v < g.n; ++v) {
      const Index from = part[v];
      if (part_count[from] == 1) continue;

      seen_parts.clear();
      for (Index e = g.xadj[v]; e < g.xadj[v + 1]; ++e) {
        const Index k = part[g.adjncy[e]];
        if (tie[k] == 0) seen_parts.push_back(k);
        tie[k] += g.adjwgt[e];
      }
      const Index internal = tie[from];
      const bool overweight = part_weight[from] > max_part_weight;

      Index best = -1;
      Index best_gain = 0;
      for (Index k : seen_parts) {
        if (k == from || part_weight[k] + g.vwgt[v] > max_part_weight) continue;
        const Index gain = tie[k] - internal;
        const bool balances = part_weight[k] + g.vwgt[v] < part_weight[from];
        bool take = false;
        if (best == -1) {
          take = gain > 0 || (gain == 0 && balances) || overweight;
        } else {
          take = gain > best_gain || (gain == best_gain && part_weight[k] < part_weight[best]);
        }
        if (take) {
          best = k;
          best_gain = gain;
        }
      }
      if (best == -1 && overweight) {
        // No neighbouring part has room: fall back to the lightest part.
        const Index lightest = std::min_element(part_weight.begin(), part_weight.end()) -
                               part_weight.begin();
        if (lightest != from && part_weight[lightest] + g.vwgt[v] <= max_part_weight) best = lightest;
      }
      for (Index k : seen_parts) tie[k] = 0;

      if (best >= 0) {
        part[v] = best;
        part_weight[from] -= g.vwgt[v];
        part_weight[best] += g.vwgt[v];
        --part_count[from];
        ++part_count[best];
        ++moves;
      }
    }
    if (moves == 0) break;
  }
}

}  // namespace

Partition partition_graph(const SparseGraph& g, Index m, std::uint64_t seed) {
  const Index n = g.num_nodes();
  if (m < 1 || m > n) {
    throw ArgumentError("partition_graph: need 1 <= m <= n (m=" + std::to_string(m) +
                        ", n=" + std::to_string(n) + ")");
  }
  if (m == 1) return Partition::from_assignment(std::vector<Index>(n, 0));

  std::mt19937_64 rng(seed);
  const Index target = std::max<Index>(2 * m, 64);
  const Index max_part_weight =
      std::max<Index>((n + m - 1) / m, static_cast<Index>(std::floor(1.1 * static_cast<double>(n) /
                                                                     static_cast<double>(m))));
  const Index max_vertex_weight = std::max<Index>(
      1, std::min<Index>((3 * n + 2 * target - 1) / (2 * target), n / (2 * m)));

  std::vector<Level> levels;
  WeightedGraph finest = from_sparse(g);
  const WeightedGraph* current = &finest;
  while (current->n > target) {
    Level level;
    if (!coarsen_once(*current, target, max_vertex_weight, rng, level)) break;
    levels.push_back(std::move(level));
    current = &levels.back().graph;
  }

  std::vector<Index> part = grow_initial_parts(*current, m, rng);
  refine(*current, m, part, max_part_weight, 10);

  for (auto it = levels.rbegin(); it != levels.rend(); ++it) {
    const auto& cmap = it->fine_to_coarse;
    std::vector<Index> finer(cmap.size());
    for (std::size_t v = 0; v < cmap.size(); ++v) finer[v] = part[cmap[v]];
    part = std::move(finer);
    const WeightedGraph& fine_graph = (it + 1 == levels.rend()) ? finest : (it + 1)->graph;
    refine(fine_graph, m, part, max_part_weight, 10);
  }

  Partition p = Partition::from_assignment(part);
  if (p.m != m) throw NumericalError("partitioner produced an empty community");
  return p;
}

}  // namespace dkgccl
