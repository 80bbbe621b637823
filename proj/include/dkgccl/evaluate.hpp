#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dkgccl/graph.hpp"
#include "dkgccl/matrix.hpp"

namespace dkgccl {

struct ProbeConfig {
  int epochs = 300;
  double lr = 0.01;
  double weight_decay = 0.0;

  void validate() const;
};

// Softmax regression on z-scored features. The standardisation (mean, scale)
// is fit on the training rows and stored with the probe.
struct ProbeParams {
  Matrix weights;  // d × B
  RowVector bias;  // B
  RowVector mean;
  RowVector scale;
};

// Full-batch Adam from zero initialisation, so the result depends only on the
// data. Throws UndefinedError when the training rows hold a single class.
ProbeParams train_probe(const Matrix& z, const LabelVector& labels, std::span<const Index> train,
                        const ProbeConfig& cfg = {});

// Class scores for the given rows (all rows when `rows` is empty).
Matrix probe_scores(const ProbeParams& probe, const Matrix& z, std::span<const Index> rows);

// Row-wise argmax; ties resolve to the lowest class id.
std::vector<int> argmax_rows(const Matrix& scores);

double accuracy(std::span<const int> predicted, std::span<const int> truth);
double accuracy(const ProbeParams& probe, const Matrix& z, const LabelVector& labels,
                std::span<const Index> rows);

struct ClassificationSummary {
  std::vector<double> accuracies;  // one per split, in split order
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

// Trains one probe per split on its train rows and scores its test rows.
ClassificationSummary evaluate_classification(const Matrix& z, const LabelVector& labels,
                                              std::span<const SplitSpec> splits,
                                              const ProbeConfig& cfg = {});

struct KMeansResult {
  std::vector<int> assignment;
  Matrix centroids;
  double inertia = 0.0;
  int iterations = 0;
};

// k-means++ seeding and Lloyd iterations until the relative inertia change is
// below `tol` or `max_iter` is reached; the lowest-inertia restart wins.
KMeansResult kmeans(const Matrix& z, int k, std::uint64_t seed, int restarts = 10,
                    int max_iter = 300, double tol = 1e-6);

// Normalised mutual information with arithmetic-mean normalisation. Two
// single-cluster assignments score 1.
double nmi(std::span<const int> a, std::span<const int> b);
double ari(std::span<const int> a, std::span<const int> b);

struct ClusteringSummary {
  std::vector<double> nmi;
  std::vector<double> ari;
  double nmi_mean = 0.0;
  double ari_mean = 0.0;
};

// k-means with B clusters once per seed, scored against the labels.
ClusteringSummary evaluate_clustering(const Matrix& z, const LabelVector& labels,
                                      std::span<const std::uint64_t> seeds, int restarts = 10);

}  // namespace dkgccl
