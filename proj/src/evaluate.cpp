#include "dkgccl/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "dkgccl/errors.hpp"
#include "dkgccl/optim.hpp"

namespace dkgccl {

void ProbeConfig::validate() const {
  if (epochs < 1) throw ArgumentError("probe: epochs must be >= 1");
  if (!(lr > 0.0)) throw ArgumentError("probe: lr must be positive");
  if (!(weight_decay >= 0.0)) throw ArgumentError("probe: weight_decay must be non-negative");
}

namespace {

Matrix gather_rows(const Matrix& z, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), z.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] < 0 || rows[r] >= z.rows()) throw ArgumentError("row index out of range");
    out.row(static_cast<Index>(r)) = z.row(rows[r]);
  }
  return out;
}

Matrix standardize(const Matrix& x, const RowVector& mean, const RowVector& scale) {
  return (x.rowwise() - mean).array().rowwise() / scale.array();
}

void softmax_rows(Matrix& logits) {
  for (Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - top).exp();
    logits.row(i) /= logits.row(i).sum();
  }
}

}  // namespace

ProbeParams train_probe(const Matrix& z, const LabelVector& labels, std::span<const Index> train,
                        const ProbeConfig& cfg) {
  cfg.validate();
  if (train.empty()) throw ArgumentError("train_probe: empty training split");
  if (labels.size() != z.rows()) throw ArgumentError("train_probe: label count differs from rows");
  const int classes = labels.num_classes;
  {
    const int first = labels.labels[static_cast<std::size_t>(train[0])];
    const bool single = std::all_of(train.begin(), train.end(), [&](Index i) {
      return labels.labels[static_cast<std::size_t>(i)] == first;
    });
    if (single) throw UndefinedError("train_probe: training split contains a single class");
  }

  const Matrix raw = gather_rows(z, train);
  const auto nt = static_cast<double>(raw.rows());
  ProbeParams p;
  p.mean = raw.colwise().mean();
  p.scale = ((raw.rowwise() - p.mean).array().square().colwise().sum() / nt).sqrt().matrix();
  for (Index d = 0; d < p.scale.size(); ++d) {
    if (!(p.scale[d] > 0.0)) p.scale[d] = 1.0;
  }
  const Matrix x = standardize(raw, p.mean, p.scale);

  Matrix onehot = Matrix::Zero(x.rows(), classes);
  for (Index r = 0; r < x.rows(); ++r) onehot(r, labels.labels[static_cast<std::size_t>(train[r])]) = 1.0;

  p.weights = Matrix::Zero(x.cols(), classes);
  p.bias = RowVector::Zero(classes);
  AdamState adam(AdamConfig{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Matrix prob = x * p.weights;
    prob.rowwise() += p.bias;
    softmax_rows(prob);
    const Matrix d_logits = (prob - onehot) / nt;
    const Matrix d_w = x.transpose() * d_logits;
    const RowVector d_b = d_logits.colwise().sum();
    adam.step({slot("probe.W", p.weights, d_w), slot("probe.b", p.bias, d_b)});
  }
  return p;
}

Matrix probe_scores(const ProbeParams& probe, const Matrix& z, std::span<const Index> rows) {
  if (z.cols() != probe.weights.rows()) throw ArgumentError("probe: feature dimension mismatch");
  const Matrix x = rows.empty() ? standardize(z, probe.mean, probe.scale)
                                : standardize(gather_rows(z, rows), probe.mean, probe.scale);
  Matrix scores = x * probe.weights;
  scores.rowwise() += probe.bias;
  return scores;
}

std::vector<int> argmax_rows(const Matrix& scores) {
  std::vector<int> out(static_cast<std::size_t>(scores.rows()), 0);
  for (Index i = 0; i < scores.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < scores.cols(); ++c) {
      if (scores(i, c) > scores(i, best)) best = c;
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.empty() || predicted.size() != truth.size()) {
    throw ArgumentError("accuracy: need equal, non-empty inputs");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double accuracy(const ProbeParams& probe, const Matrix& z, const LabelVector& labels,
                std::span<const Index> rows) {
  if (rows.empty()) throw ArgumentError("accuracy: empty index set");
  const std::vector<int> predicted = argmax_rows(probe_scores(probe, z, rows));
  std::vector<int> truth;
  truth.reserve(rows.size());
  for (Index r : rows) truth.push_back(labels.labels[static_cast<std::size_t>(r)]);
  return accuracy(predicted, truth);
}

ClassificationSummary evaluate_classification(const Matrix& z, const LabelVector& labels,
                                              std::span<const SplitSpec> splits,
                                              const ProbeConfig& cfg) {
  if (splits.empty()) throw ArgumentError("evaluate_classification: no splits");
  ClassificationSummary s;
  for (const SplitSpec& split : splits) {
    split.validate(z.rows());
    const ProbeParams probe = train_probe(z, labels, split.train, cfg);
    s.accuracies.push_back(accuracy(probe, z, labels, split.test));
  }
  const auto k = static_cast<double>(s.accuracies.size());
  for (double a : s.accuracies) s.mean += a;
  s.mean /= k;
  for (double a : s.accuracies) s.stddev += (a - s.mean) * (a - s.mean);
  s.stddev = std::sqrt(s.stddev / k);
  return s;
}

namespace {

struct Lloyd {
  std::vector<int> assignment;
  Matrix centroids;
  double inertia = 0.0;
  int iterations = 0;
};

// Squared distance to the nearest centroid; ties go to the lowest centroid id.
double nearest(const Matrix& z, Index i, const Matrix& centroids, int& best) {
  best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Index c = 0; c < centroids.rows(); ++c) {
    const double d = (z.row(i) - centroids.row(c)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best_d;
}

Matrix kmeanspp(const Matrix& z, int k, std::mt19937_64& rng) {
  const Index n = z.rows();
  Matrix centroids(k, z.cols());
  std::uniform_int_distribution<Index> pick(0, n - 1);
  centroids.row(0) = z.row(pick(rng));
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) dist[i] = (z.row(i) - centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double d : dist) total += d;
    Index chosen;
    if (total > 0.0) {
      std::discrete_distribution<Index> weighted(dist.begin(), dist.end());
      chosen = weighted(rng);
    } else {
      chosen = pick(rng);
    }
    centroids.row(c) = z.row(chosen);
    for (Index i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], (z.row(i) - centroids.row(c)).squaredNorm());
    }
  }
  return centroids;
}

Lloyd lloyd(const Matrix& z, Matrix centroids, int max_iter, double tol) {
  const Index n = z.rows();
  const Index k = centroids.rows();
  Lloyd r;
  r.assignment.assign(static_cast<std::size_t>(n), 0);
  std::vector<double> dist(static_cast<std::size_t>(n));
  double previous = std::numeric_limits<double>::infinity();
  for (int it = 1;; ++it) {
    r.inertia = 0.0;
    for (Index i = 0; i < n; ++i) {
      dist[i] = nearest(z, i, centroids, r.assignment[i]);
      r.inertia += dist[i];
    }
    r.iterations = it;
    const bool converged =
        r.inertia == 0.0 || (std::isfinite(previous) &&
                             std::abs(previous - r.inertia) <= tol * std::max(previous, 1e-300));
    if (converged || it >= max_iter) break;
    previous = r.inertia;

    Matrix sums = Matrix::Zero(k, z.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(r.assignment[i]) += z.row(i);
      ++counts[r.assignment[i]];
    }
    for (Index c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[c]);
      } else {
        // Empty cluster: move it onto the point farthest from its centroid.
        const auto far = std::max_element(dist.begin(), dist.end()) - dist.begin();
        centroids.row(c) = z.row(far);
        dist[far] = 0.0;
      }
    }
  }
  r.centroids = std::move(centroids);
  return r;
}

}  // namespace

KMeansResult kmeans(const Matrix& z, int k, std::uint64_t seed, int restarts, int max_iter,
                    double tol) {
  if (k < 1 || k > z.rows()) {
    throw ArgumentError("kmeans: need 1 <= B <= n (B = " + std::to_string(k) + ", n = " +
                        std::to_string(z.rows()) + ")");
  }
  if (restarts < 1 || max_iter < 1) throw ArgumentError("kmeans: restarts and max_iter must be >= 1");
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(r)};
    std::mt19937_64 rng(seq);
    Lloyd run = lloyd(z, kmeanspp(z, k, rng), max_iter, tol);
    if (run.inertia < best.inertia) {
      best.assignment = std::move(run.assignment);
      best.centroids = std::move(run.centroids);
      best.inertia = run.inertia;
      best.iterations = run.iterations;
    }
  }
  return best;
}

namespace {

struct Contingency {
  std::vector<std::vector<double>> table;
  std::vector<double> rows;
  std::vector<double> cols;
  double n = 0.0;
};

Contingency contingency(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ArgumentError("clustering metrics: lengths differ");
  if (a.empty()) throw ArgumentError("clustering metrics: empty assignments");
  std::map<int, std::size_t> ia;
  std::map<int, std::size_t> ib;
  for (int x : a) ia.emplace(x, 0);
  for (int x : b) ib.emplace(x, 0);
  std::size_t next = 0;
  for (auto& [label, id] : ia) id = next++;
  next = 0;
  for (auto& [label, id] : ib) id = next++;
  Contingency c;
  c.table.assign(ia.size(), std::vector<double>(ib.size(), 0.0));
  c.rows.assign(ia.size(), 0.0);
  c.cols.assign(ib.size(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::size_t r = ia[a[i]];
    const std::size_t s = ib[b[i]];
    c.table[r][s] += 1.0;
    c.rows[r] += 1.0;
    c.cols[s] += 1.0;
  }
  c.n = static_cast<double>(a.size());
  return c;
}

double entropy(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / n) * std::log(c / n);
  }
  return h;
}

double pairs(double x) { return x * (x - 1.0) / 2.0; }

}  // namespace

double nmi(std::span<const int> a, std::span<const int> b) {
  const Contingency c = contingency(a, b);
  const double ha = entropy(c.rows, c.n);
  const double hb = entropy(c.cols, c.n);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  double mi = 0.0;
  for (std::size_t r = 0; r < c.rows.size(); ++r) {
    for (std::size_t s = 0; s < c.cols.size(); ++s) {
      const double nrs = c.table[r][s];
      if (nrs > 0.0) mi += (nrs / c.n) * std::log(c.n * nrs / (c.rows[r] * c.cols[s]));
    }
  }
  return std::clamp(mi / (0.5 * (ha + hb)), 0.0, 1.0);
}

double ari(std::span<const int> a, std::span<const int> b) {
  const Contingency c = contingency(a, b);
  double index = 0.0;
  for (const auto& row : c.table) {
    for (double x : row) index += pairs(x);
  }
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (double x : c.rows) sum_a += pairs(x);
  for (double x : c.cols) sum_b += pairs(x);
  const double total = pairs(c.n);
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double maximum = 0.5 * (sum_a + sum_b);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

ClusteringSummary evaluate_clustering(const Matrix& z, const LabelVector& labels,
                                      std::span<const std::uint64_t> seeds, int restarts) {
  if (seeds.empty()) throw ArgumentError("evaluate_clustering: no seeds");
  labels.validate(z.rows(), true);
  ClusteringSummary s;
  for (std::uint64_t seed : seeds) {
    const KMeansResult km = kmeans(z, labels.num_classes, seed, restarts);
    s.nmi.push_back(nmi(km.assignment, labels.labels));
    s.ari.push_back(ari(km.assignment, labels.labels));
  }
  for (double x : s.nmi) s.nmi_mean += x;
  for (double x : s.ari) s.ari_mean += x;
  s.nmi_mean /= static_cast<double>(s.nmi.size());
  s.ari_mean /= static_cast<double>(s.ari.size());
  return s;
}

}  // namespace dkgccl
