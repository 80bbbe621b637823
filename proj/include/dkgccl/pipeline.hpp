#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dkgccl/distill.hpp"
#include "dkgccl/graph.hpp"
#include "dkgccl/partition.hpp"
#include "dkgccl/trainer.hpp"

namespace dkgccl {

struct DatasetPaths {
  std::filesystem::path edges;
  std::filesystem::path features;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> splits;     // fixed split instead of random ones
  std::optional<std::filesystem::path> partition;  // external partition file
};

struct PartitionSettings {
  std::optional<double> rate;          // "partition_rate": m = round(rate · n)
  std::optional<Index> communities;    // or an explicit m
  std::uint64_t seed = 0;
  CoarsenNormalization normalization = CoarsenNormalization::symmetric;
  WeightMode weights = WeightMode::mean;
};

enum class EvalTask { classify, cluster, both };

struct EvalSettings {
  EvalTask task = EvalTask::classify;
  int seeds = 10;
  Index train_per_class = 20;
  Index valid = 500;
  Index test = 1000;
  int probe_epochs = 300;
  double probe_lr = 0.01;
  double probe_weight_decay = 0.0;
  int kmeans_restarts = 10;
};

struct BenchConfig {
  std::vector<Index> loss_grid{20000, 40000, 80000};
  std::vector<Index> naive_grid{2000, 4000, 8000};
  std::vector<Index> inference_grid{10000, 20000, 40000};
  Index communities = 32;
  Index loss_dim = 64;
  Index naive_dim = 16;
  Index inference_dim = 32;
  Index feature_dim = 16;
  double mean_degree = 20.0;
  int hops = 10;
  int repeats = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RunConfig {
  DatasetPaths dataset;
  PartitionSettings partition;
  TrainConfig train;
  Activation sigma = Activation::relu;
  EvalSettings eval;
  BenchConfig bench;

  // Canonical JSON of the resolved settings. Dataset files enter through
  // their content hashes, so moving the data does not change the digest.
  nlohmann::json resolved() const;
  std::uint64_t digest() const;
};

// Parses a config document; relative dataset paths resolve against base_dir.
// Unknown keys, wrong types and out-of-range values raise ConfigError.
RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

EvalTask parse_eval_task(const std::string& s);
std::string to_string(EvalTask task);

struct Dataset {
  SparseGraph graph;
  std::optional<LabelVector> labels;
  std::optional<SplitSpec> fixed_split;
};

Dataset load_dataset(const RunConfig& cfg);

// Artifact locations inside <out>/<config digest>/.
struct RunPaths {
  std::filesystem::path dir;
  std::filesystem::path partition;        // partition.txt
  std::filesystem::path partition_report; // partition.json
  std::filesystem::path encoder;          // encoder.ckpt
  std::filesystem::path mlp;              // distill.ckpt
  std::filesystem::path embeddings_gnn;
  std::filesystem::path embeddings_mlp;
  std::filesystem::path metrics;
  std::filesystem::path train_log;
  std::filesystem::path distill_log;
  std::filesystem::path manifest;
};

RunPaths run_paths(const std::filesystem::path& out_root, const RunConfig& cfg);

enum class EmbedPath { gnn, mlp };
EmbedPath parse_embed_path(const std::string& s);

// Individual stages. Each reuses earlier artifacts from the run directory when
// present (after checking their digests) and recomputes them otherwise.
Partition run_partition_step(const RunConfig& cfg, const Dataset& data, const RunPaths& paths);
EncoderParams run_train_step(const RunConfig& cfg, const Dataset& data, const RunPaths& paths);
DistillMlp run_distill_step(const RunConfig& cfg, const Dataset& data, const RunPaths& paths);
Matrix run_embed_step(const RunConfig& cfg, const Dataset& data, const RunPaths& paths,
                      EmbedPath path);
nlohmann::json run_eval_step(const RunConfig& cfg, const Dataset& data, const RunPaths& paths,
                             EvalTask task);

// Partition, stage 1, stage 2, both embeddings and evaluation (when labels
// are available). Returns the run directory layout.
RunPaths run_pipeline(const RunConfig& cfg, const std::filesystem::path& out_root);

// The random splits used by classification: 20 per class / 500 / 1000 by
// default, one per evaluation seed.
std::vector<SplitSpec> evaluation_splits(const RunConfig& cfg, const Dataset& data);

struct BenchPoint {
  Index n = 0;
  double seconds = 0.0;
  double peak_bytes = 0.0;  // estimated working set
};

struct BenchReport {
  std::vector<BenchPoint> fast_loss;
  std::vector<BenchPoint> naive_loss;
  std::vector<BenchPoint> gnn_inference;
  std::vector<BenchPoint> mlp_inference;
  std::uint64_t mlp_adjacency_touches = 0;
  std::uint64_t gnn_adjacency_touches = 0;
};

BenchReport run_bench(const BenchConfig& cfg);
nlohmann::json to_json(const BenchReport& report);

}  // namespace dkgccl
