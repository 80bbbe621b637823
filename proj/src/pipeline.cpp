#include "dkgccl/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <random>
#include <set>

#include "dkgccl/errors.hpp"
#include "dkgccl/evaluate.hpp"
#include "dkgccl/io.hpp"
#include "dkgccl/loss.hpp"
#include "dkgccl/synthetic.hpp"

namespace dkgccl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads one object of the config, remembering which keys were consumed so
// that leftovers can be reported.
class Section {
 public:
  Section(const json& doc, const std::string& name) : name_(name) {
    if (doc.contains(name)) {
      obj_ = &doc.at(name);
      if (!obj_->is_object()) throw ConfigError("config: '" + name + "' must be an object");
    }
  }

  bool has(const std::string& key) const { return obj_ && obj_->contains(key); }

  std::optional<double> number(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw type_error(key, "a number");
    return v->get<double>();
  }

  std::optional<std::int64_t> integer(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) throw type_error(key, "an integer");
    return v->get<std::int64_t>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) throw type_error(key, "a boolean");
    return v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw type_error(key, "a string");
    return v->get<std::string>();
  }

  std::optional<std::vector<Index>> integers(const std::string& key) {
    const json* v = take(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw type_error(key, "an array of integers");
    std::vector<Index> out;
    for (const json& x : *v) {
      if (!x.is_number_integer()) throw type_error(key, "an array of integers");
      out.push_back(x.get<Index>());
    }
    return out;
  }

  void finish() const {
    if (!obj_) return;
    for (const auto& [key, value] : obj_->items()) {
      if (!used_.count(key)) throw ConfigError("config: unknown key '" + name_ + "." + key + "'");
    }
  }

 private:
  const json* take(const std::string& key) {
    if (!has(key)) return nullptr;
    used_.insert(key);
    return &obj_->at(key);
  }

  ConfigError type_error(const std::string& key, const std::string& what) const {
    return ConfigError("config: '" + name_ + "." + key + "' must be " + what);
  }

  std::string name_;
  const json* obj_ = nullptr;
  std::set<std::string> used_;
};

template <typename T, typename F>
T parse_enum(const std::string& key, const std::string& value, F&& parse) {
  try {
    return parse(value);
  } catch (const std::exception& e) {
    throw ConfigError("config: '" + key + "': " + e.what());
  }
}

std::string hash_or_null(const std::optional<fs::path>& p) {
  return p ? io::hex_digest(io::file_hash(*p)) : std::string();
}

}  // namespace

EvalTask parse_eval_task(const std::string& s) {
  if (s == "classify") return EvalTask::classify;
  if (s == "cluster") return EvalTask::cluster;
  if (s == "both") return EvalTask::both;
  throw ConfigError("unknown eval task '" + s + "'");
}

std::string to_string(EvalTask task) {
  switch (task) {
    case EvalTask::classify: return "classify";
    case EvalTask::cluster: return "cluster";
    case EvalTask::both: return "both";
  }
  return "classify";
}

EmbedPath parse_embed_path(const std::string& s) {
  if (s == "gnn") return EmbedPath::gnn;
  if (s == "mlp") return EmbedPath::mlp;
  throw ConfigError("unknown embedding path '" + s + "' (expected gnn or mlp)");
}

void BenchConfig::validate() const {
  auto ascending = [](const std::vector<Index>& grid) {
    return !grid.empty() && std::is_sorted(grid.begin(), grid.end()) &&
           std::adjacent_find(grid.begin(), grid.end()) == grid.end() && grid.front() > 0;
  };
  if (!ascending(loss_grid) || !ascending(naive_grid) || !ascending(inference_grid)) {
    throw ArgumentError("bench: grids must be non-empty, positive and strictly ascending");
  }
  if (naive_grid.back() > 20000) throw ArgumentError("bench: naive oracle grid is capped at 20000");
  if (communities < 1 || loss_dim < 1 || naive_dim < 1 || inference_dim < 1 || feature_dim < 1 ||
      hops < 1 || repeats < 1 || !(mean_degree > 0.0)) {
    throw ArgumentError("bench: sizes, hops and repeats must be positive");
  }
}

RunConfig parse_run_config(const json& doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  static const std::set<std::string> sections{"dataset", "partition", "encoder", "loss",
                                              "train",   "propagate", "eval",    "bench"};
  for (const auto& [key, value] : doc.items()) {
    if (!sections.count(key)) throw ConfigError("config: unknown section '" + key + "'");
  }
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };

  RunConfig cfg;
  {
    Section s(doc, "dataset");
    const auto edges = s.string("edges");
    const auto features = s.string("features");
    if (!edges || !features) throw ConfigError("config: dataset.edges and dataset.features are required");
    cfg.dataset.edges = resolve(*edges);
    cfg.dataset.features = resolve(*features);
    if (auto v = s.string("labels")) cfg.dataset.labels = resolve(*v);
    if (auto v = s.string("splits")) cfg.dataset.splits = resolve(*v);
    if (auto v = s.string("partition")) cfg.dataset.partition = resolve(*v);
    s.finish();
    for (const fs::path& p : {cfg.dataset.edges, cfg.dataset.features}) {
      if (!fs::exists(p)) throw ConfigError("config: dataset file not found: " + p.string());
    }
    for (const auto& p : {cfg.dataset.labels, cfg.dataset.splits, cfg.dataset.partition}) {
      if (p && !fs::exists(*p)) throw ConfigError("config: dataset file not found: " + p->string());
    }
  }
  {
    Section s(doc, "partition");
    cfg.partition.rate = s.number("partition_rate");
    if (auto m = s.integer("communities")) cfg.partition.communities = *m;
    if (cfg.partition.rate && cfg.partition.communities) {
      throw ConfigError("config: set either partition.partition_rate or partition.communities, not both");
    }
    if (!cfg.partition.rate && !cfg.partition.communities) cfg.partition.rate = 0.1;
    if (cfg.partition.rate && !(*cfg.partition.rate > 0.0 && *cfg.partition.rate <= 1.0)) {
      throw ConfigError("config: partition.partition_rate must be in (0, 1]");
    }
    if (cfg.partition.communities && *cfg.partition.communities < 1) {
      throw ConfigError("config: partition.communities must be >= 1");
    }
    if (auto v = s.integer("seed")) cfg.partition.seed = static_cast<std::uint64_t>(*v);
    if (auto v = s.string("normalization")) {
      cfg.partition.normalization = parse_enum<CoarsenNormalization>("partition.normalization", *v,
                                                                     parse_normalization);
    }
    if (auto v = s.string("weights")) {
      cfg.partition.weights = parse_enum<WeightMode>("partition.weights", *v, parse_weight_mode);
    }
    s.finish();
  }
  {
    Section s(doc, "encoder");
    if (auto v = s.integer("d")) cfg.train.node_dim = *v;
    cfg.train.community_dim = cfg.train.node_dim;
    if (auto v = s.integer("d_community")) cfg.train.community_dim = *v;
    s.finish();
  }
  {
    Section s(doc, "loss");
    if (auto v = s.string("variant")) {
      cfg.train.loss.variant = parse_enum<KernelCombination>("loss.variant", *v, parse_variant);
    }
    const bool alpha_given = s.has("alpha");
    if (auto v = s.number("alpha")) cfg.train.loss.alpha = *v;
    if (alpha_given && cfg.train.loss.variant == KernelCombination::tensor_product) {
      throw ConfigError("config: loss.alpha is only meaningful for the linear_combination variant");
    }
    if (auto v = s.number("tau")) cfg.train.loss.tau = *v;
    if (auto v = s.number("p")) cfg.train.dropout.p = *v;
    if (auto v = s.string("feature_map")) {
      cfg.train.loss.feature_map = parse_enum<FeatureMapKind>("loss.feature_map", *v, parse_feature_map);
    }
    if (auto v = s.boolean("include_self_community")) cfg.train.loss.include_self_community = *v;
    s.finish();
  }
  {
    Section s(doc, "train");
    if (auto v = s.number("lr")) cfg.train.lr = *v;
    if (auto v = s.integer("epoch")) cfg.train.epochs = static_cast<int>(*v);
    if (auto v = s.integer("distill_epochs")) cfg.train.distill_epochs = static_cast<int>(*v);
    if (auto v = s.number("distill_lr")) cfg.train.distill_lr = *v;
    if (auto v = s.number("weight_decay")) cfg.train.weight_decay = *v;
    if (auto v = s.integer("seed")) cfg.train.seed = static_cast<std::uint64_t>(*v);
    if (auto v = s.integer("hidden")) cfg.train.hidden_dim = *v;
    s.finish();
  }
  {
    Section s(doc, "propagate");
    if (auto v = s.integer("k_hop")) cfg.train.hops = static_cast<int>(*v);
    if (auto v = s.string("sigma")) cfg.sigma = parse_enum<Activation>("propagate.sigma", *v, parse_activation);
    s.finish();
  }
  {
    Section s(doc, "eval");
    if (auto v = s.string("task")) cfg.eval.task = parse_enum<EvalTask>("eval.task", *v, parse_eval_task);
    if (auto v = s.integer("seeds")) cfg.eval.seeds = static_cast<int>(*v);
    if (auto v = s.integer("train_per_class")) cfg.eval.train_per_class = *v;
    if (auto v = s.integer("valid")) cfg.eval.valid = *v;
    if (auto v = s.integer("test")) cfg.eval.test = *v;
    if (auto v = s.integer("probe_epochs")) cfg.eval.probe_epochs = static_cast<int>(*v);
    if (auto v = s.number("probe_lr")) cfg.eval.probe_lr = *v;
    if (auto v = s.number("probe_weight_decay")) cfg.eval.probe_weight_decay = *v;
    if (auto v = s.integer("kmeans_restarts")) cfg.eval.kmeans_restarts = static_cast<int>(*v);
    s.finish();
    if (cfg.eval.seeds < 1 || cfg.eval.train_per_class < 1 || cfg.eval.valid < 0 ||
        cfg.eval.test < 1 || cfg.eval.kmeans_restarts < 1) {
      throw ConfigError("config: eval sizes and counts must be positive");
    }
    try {
      ProbeConfig{cfg.eval.probe_epochs, cfg.eval.probe_lr, cfg.eval.probe_weight_decay}.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("config: eval: ") + e.what());
    }
  }
  {
    Section s(doc, "bench");
    if (auto v = s.integers("loss_grid")) cfg.bench.loss_grid = *v;
    if (auto v = s.integers("naive_grid")) cfg.bench.naive_grid = *v;
    if (auto v = s.integers("inference_grid")) cfg.bench.inference_grid = *v;
    if (auto v = s.integer("communities")) cfg.bench.communities = *v;
    if (auto v = s.integer("loss_dim")) cfg.bench.loss_dim = *v;
    if (auto v = s.integer("naive_dim")) cfg.bench.naive_dim = *v;
    if (auto v = s.integer("inference_dim")) cfg.bench.inference_dim = *v;
    if (auto v = s.integer("feature_dim")) cfg.bench.feature_dim = *v;
    if (auto v = s.number("mean_degree")) cfg.bench.mean_degree = *v;
    if (auto v = s.integer("hops")) cfg.bench.hops = static_cast<int>(*v);
    if (auto v = s.integer("repeats")) cfg.bench.repeats = static_cast<int>(*v);
    if (auto v = s.integer("seed")) cfg.bench.seed = static_cast<std::uint64_t>(*v);
    s.finish();
    try {
      cfg.bench.validate();
    } catch (const ArgumentError& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }
  try {
    cfg.train.validate();
  } catch (const ArgumentError& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("config: invalid JSON in " + path.string() + ": " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

json RunConfig::resolved() const {
  json j;
  j["dataset"] = {{"edges", io::hex_digest(io::file_hash(dataset.edges))},
                  {"features", io::hex_digest(io::file_hash(dataset.features))},
                  {"labels", hash_or_null(dataset.labels)},
                  {"splits", hash_or_null(dataset.splits)},
                  {"partition", hash_or_null(dataset.partition)}};
  j["partition"] = {{"partition_rate", partition.rate ? json(*partition.rate) : json()},
                    {"communities", partition.communities ? json(*partition.communities) : json()},
                    {"seed", partition.seed},
                    {"normalization", to_string(partition.normalization)},
                    {"weights", to_string(partition.weights)}};
  j["encoder"] = {{"d", train.node_dim}, {"d_community", train.community_dim}};
  j["loss"] = {{"variant", to_string(train.loss.variant)},
               {"alpha", train.loss.alpha},
               {"tau", train.loss.tau},
               {"p", train.dropout.p},
               {"feature_map", to_string(train.loss.feature_map)},
               {"include_self_community", train.loss.include_self_community},
               {"epsilon_clamp", train.loss.epsilon_clamp}};
  j["train"] = {{"lr", train.lr},
                {"epoch", train.epochs},
                {"distill_epochs", train.distill_epochs},
                {"distill_lr", train.distill_lr},
                {"weight_decay", train.weight_decay},
                {"seed", train.seed},
                {"hidden", train.hidden_dim > 0 ? train.hidden_dim : train.node_dim}};
  j["propagate"] = {{"k_hop", train.hops}, {"sigma", to_string(sigma)}};
  j["eval"] = {{"task", to_string(eval.task)},
               {"seeds", eval.seeds},
               {"train_per_class", eval.train_per_class},
               {"valid", eval.valid},
               {"test", eval.test},
               {"probe_epochs", eval.probe_epochs},
               {"probe_lr", eval.probe_lr},
               {"probe_weight_decay", eval.probe_weight_decay},
               {"kmeans_restarts", eval.kmeans_restarts}};
  return j;
}

std::uint64_t RunConfig::digest() const { return io::fnv1a(resolved().dump()); }

Dataset load_dataset(const RunConfig& cfg) {
  Dataset d;
  d.graph = load_graph(cfg.dataset.edges, cfg.dataset.features);
  if (cfg.dataset.labels) {
    d.labels = io::read_labels(*cfg.dataset.labels);
    d.labels->validate(d.graph.num_nodes());
  }
  if (cfg.dataset.splits) {
    d.fixed_split = io::read_splits(*cfg.dataset.splits);
    d.fixed_split->validate(d.graph.num_nodes());
  }
  return d;
}

RunPaths run_paths(const fs::path& out_root, const RunConfig& cfg) {
  RunPaths p;
  p.dir = out_root / io::hex_digest(cfg.digest());
  p.partition = p.dir / "partition.txt";
  p.partition_report = p.dir / "partition.json";
  p.encoder = p.dir / "encoder.ckpt";
  p.mlp = p.dir / "distill.ckpt";
  p.embeddings_gnn = p.dir / "embeddings_gnn.bin";
  p.embeddings_mlp = p.dir / "embeddings_mlp.bin";
  p.metrics = p.dir / "metrics.json";
  p.train_log = p.dir / "train_log.jsonl";
  p.distill_log = p.dir / "distill_log.jsonl";
  p.manifest = p.dir / "manifest.json";
  return p;
}

namespace {

void check_digest(const fs::path& artifact, std::optional<std::uint64_t> stored,
                  std::uint64_t expected) {
  if (!stored) throw ConfigError(artifact.string() + " carries no config digest");
  if (*stored != expected) {
    throw ConfigError(artifact.string() + " was produced by config " + io::hex_digest(*stored) +
                      ", not " + io::hex_digest(expected));
  }
}

void require_artifact(const fs::path& p, const std::string& producer) {
  if (!fs::exists(p)) {
    throw InputError("missing " + p.filename().string() + " in " + p.parent_path().string() +
                     "; run `" + producer + "` first");
  }
}

EncoderParams load_checked_encoder(const RunPaths& paths, std::uint64_t digest) {
  require_artifact(paths.encoder, "train");
  std::optional<std::uint64_t> stored;
  EncoderParams params = load_encoder(paths.encoder, &stored);
  check_digest(paths.encoder, stored, digest);
  return params;
}

DistillMlp load_checked_mlp(const RunPaths& paths, std::uint64_t digest) {
  require_artifact(paths.mlp, "distill");
  std::optional<std::uint64_t> stored;
  DistillMlp mlp = load_mlp(paths.mlp, &stored);
  check_digest(paths.mlp, stored, digest);
  return mlp;
}

// Hashes of the deterministic artifacts; logs carry wall times and are left out.
void write_manifest(const RunPaths& paths, std::uint64_t digest) {
  json artifacts = json::object();
  for (const fs::path& p : {paths.partition, paths.partition_report, paths.encoder, paths.mlp,
                            paths.embeddings_gnn, paths.embeddings_mlp, paths.metrics}) {
    if (fs::exists(p)) artifacts[p.filename().string()] = io::hex_digest(io::file_hash(p));
  }
  json m = {{"config_digest", io::hex_digest(digest)}, {"artifacts", artifacts}};
  io::write_text(paths.manifest, m.dump(2) + "\n");
}

void write_log(const fs::path& path, const std::vector<EpochRecord>& trace, Index n, bool per_node) {
  std::string text;
  for (const EpochRecord& r : trace) {
    json line = {{"epoch", r.epoch}, {"loss", r.loss}, {"wall_ms", r.wall_ms}};
    if (per_node) {
      line["loss_per_node"] = r.loss / static_cast<double>(n);
    } else {
      line["clamped"] = r.clamped;
    }
    text += line.dump() + "\n";
  }
  io::write_text(path, text);
}

Index resolve_communities(const RunConfig& cfg, Index n) {
  if (cfg.partition.communities) {
    if (*cfg.partition.communities > n) {
      throw ConfigError("config: partition.communities exceeds the node count");
    }
    return *cfg.partition.communities;
  }
  return communities_from_rate(*cfg.partition.rate, n);
}

}  // namespace

Partition run_partition_step(const RunConfig& cfg, const Dataset& data, const RunPaths& paths) {
  const std::uint64_t digest = cfg.digest();
  const Index n = data.graph.num_nodes();
  Partition p;
  if (cfg.dataset.partition) {
    p = load_partition(*cfg.dataset.partition, n);
  } else {
    p = partition_graph(data.graph, resolve_communities(cfg, n), cfg.partition.seed);
  }
  p = assignment_weights(std::move(p), cfg.partition.weights);

  fs::create_directories(paths.dir);
  save_partition(paths.partition, p);
  json report = {{"m", p.m},
                 {"edge_cut", edge_cut(data.graph, p)},
                 {"sizes", p.sizes},
                 {"config_digest", io::hex_digest(digest)}};
  io::write_text(paths.partition_report, report.dump(2) + "\n");
  write_manifest(paths, digest);
  return p;
}

EncoderParams run_train_step(const RunConfig& cfg, const Dataset& data, const RunPaths& paths) {
  const std::uint64_t digest = cfg.digest();
  const Partition p = run_partition_step(cfg, data, paths);
  const CoarsenedGraph coarse = coarsen(data.graph, p, cfg.partition.normalization);
  const Stage1Result r = train_stage1(data.graph, p, coarse.matrix, cfg.train);
  save_encoder(paths.encoder, r.params, digest);
  write_log(paths.train_log, r.trace, data.graph.num_nodes(), false);
  write_manifest(paths, digest);
  return r.params;
}

DistillMlp run_distill_step(const RunConfig& cfg, const Dataset& data, const RunPaths& paths) {
  const std::uint64_t digest = cfg.digest();
  const EncoderParams params = load_checked_encoder(paths, digest);
  const Stage2Result r = train_stage2(data.graph, params.node_weights, cfg.train);
  save_mlp(paths.mlp, r.mlp, digest);
  write_log(paths.distill_log, r.trace, data.graph.num_nodes(), true);
  write_manifest(paths, digest);
  return r.mlp;
}

Matrix run_embed_step(const RunConfig& cfg, const Dataset& data, const RunPaths& paths,
                      EmbedPath path) {
  const std::uint64_t digest = cfg.digest();
  const EncoderParams params = load_checked_encoder(paths, digest);
  FinalRepresentation rep;
  if (path == EmbedPath::mlp) {
    const DistillMlp mlp = load_checked_mlp(paths, digest);
    rep = final_representation(data.graph, params.node_weights, &mlp, cfg.train.hops, cfg.sigma);
    io::write_matrix_binary(paths.embeddings_mlp, rep.z, digest);
  } else {
    rep = final_representation(data.graph, params.node_weights, nullptr, cfg.train.hops, cfg.sigma);
    io::write_matrix_binary(paths.embeddings_gnn, rep.z, digest);
  }
  write_manifest(paths, digest);
  return rep.z;
}

std::vector<SplitSpec> evaluation_splits(const RunConfig& cfg, const Dataset& data) {
  if (!data.labels) throw InputError("evaluation needs dataset.labels");
  if (data.fixed_split) return {*data.fixed_split};
  std::vector<SplitSpec> splits;
  for (int s = 0; s < cfg.eval.seeds; ++s) {
    splits.push_back(random_split(*data.labels, cfg.eval.train_per_class, cfg.eval.valid,
                                  cfg.eval.test, derive_seed(cfg.train.seed, 100 + s)));
  }
  return splits;
}

json run_eval_step(const RunConfig& cfg, const Dataset& data, const RunPaths& paths, EvalTask task) {
  const std::uint64_t digest = cfg.digest();
  if (!data.labels) throw InputError("evaluation needs dataset.labels");
  data.labels->validate(data.graph.num_nodes(), true);

  std::vector<std::pair<std::string, Matrix>> embeddings;
  for (const auto& [name, file] : {std::pair{std::string("gnn"), paths.embeddings_gnn},
                                   std::pair{std::string("mlp"), paths.embeddings_mlp}}) {
    if (!fs::exists(file)) continue;
    io::BinaryMatrix m = io::read_matrix_binary(file);
    check_digest(file, m.digest, digest);
    if (m.values.rows() != data.graph.num_nodes()) {
      throw InputError(file.string() + " has the wrong number of rows");
    }
    embeddings.emplace_back(name, std::move(m.values));
  }
  if (embeddings.empty()) require_artifact(paths.embeddings_gnn, "embed");

  json metrics = json::object();
  if (fs::exists(paths.metrics)) {
    metrics = json::parse(io::read_text(paths.metrics));
    if (metrics.value("config_digest", "") != io::hex_digest(digest)) metrics = json::object();
  }
  metrics["config_digest"] = io::hex_digest(digest);
  metrics["seed"] = cfg.train.seed;

  if (task == EvalTask::classify || task == EvalTask::both) {
    const std::vector<SplitSpec> splits = evaluation_splits(cfg, data);
    const ProbeConfig probe{cfg.eval.probe_epochs, cfg.eval.probe_lr, cfg.eval.probe_weight_decay};
    json section = json::object();
    section["split_sizes"] = {{"train", splits.front().train.size()},
                              {"valid", splits.front().valid.size()},
                              {"test", splits.front().test.size()}};
    section["splits"] = splits.size();
    for (const auto& [name, z] : embeddings) {
      const ClassificationSummary s = evaluate_classification(z, *data.labels, splits, probe);
      section[name] = {{"accuracies", s.accuracies}, {"mean", s.mean}, {"std", s.stddev}};
    }
    metrics["classify"] = section;
  }
  if (task == EvalTask::cluster || task == EvalTask::both) {
    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < cfg.eval.seeds; ++s) seeds.push_back(derive_seed(cfg.train.seed, 200 + s));
    json section = json::object();
    for (const auto& [name, z] : embeddings) {
      const ClusteringSummary s =
          evaluate_clustering(z, *data.labels, seeds, cfg.eval.kmeans_restarts);
      section[name] = {{"nmi", s.nmi}, {"ari", s.ari}, {"nmi_mean", s.nmi_mean}, {"ari_mean", s.ari_mean}};
    }
    metrics["cluster"] = section;
  }

  json hashes = json::object();
  for (const fs::path& p : {paths.encoder, paths.mlp, paths.embeddings_gnn, paths.embeddings_mlp}) {
    if (fs::exists(p)) hashes[p.filename().string()] = io::hex_digest(io::file_hash(p));
  }
  metrics["artifacts"] = hashes;
  io::write_text(paths.metrics, metrics.dump(2) + "\n");
  write_manifest(paths, digest);
  return metrics;
}

RunPaths run_pipeline(const RunConfig& cfg, const fs::path& out_root) {
  const Dataset data = load_dataset(cfg);
  const RunPaths paths = run_paths(out_root, cfg);
  run_train_step(cfg, data, paths);
  run_distill_step(cfg, data, paths);
  run_embed_step(cfg, data, paths, EmbedPath::gnn);
  run_embed_step(cfg, data, paths, EmbedPath::mlp);
  if (data.labels) run_eval_step(cfg, data, paths, cfg.eval.task);
  return paths;
}

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double min_seconds(int repeats, F&& f) {
  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < repeats; ++r) {
    const auto start = Clock::now();
    f();
    best = std::min(best, std::chrono::duration<double>(Clock::now() - start).count());
  }
  return best;
}

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

struct LossInstance {
  Partition partition;
  Matrix coarse;
  Matrix nodes;
  Matrix communities;
};

LossInstance loss_instance(Index n, Index m, Index dim, std::uint64_t seed) {
  const SbmSpec spec = sbm_with_degree(n, m, 10.0, 0.8);
  const SparseGraph g(sbm_edges(spec, seed), Matrix::Zero(n, 1));
  std::vector<Index> blocks;
  for (std::size_t b = 0; b < spec.block_sizes.size(); ++b) {
    blocks.insert(blocks.end(), static_cast<std::size_t>(spec.block_sizes[b]), static_cast<Index>(b));
  }
  LossInstance inst;
  inst.partition = Partition::from_assignment(std::move(blocks));
  inst.coarse = coarsen(g, inst.partition, CoarsenNormalization::symmetric).matrix;
  std::mt19937_64 rng(seed + 1);
  inst.nodes = gaussian(n, dim, rng);
  inst.communities = gaussian(m, dim, rng);
  return inst;
}

}  // namespace

BenchReport run_bench(const BenchConfig& cfg) {
  cfg.validate();
  BenchReport report;
  LossConfig loss_cfg;
  loss_cfg.alpha = 0.5;

  for (Index n : cfg.loss_grid) {
    const LossInstance inst = loss_instance(n, cfg.communities, cfg.loss_dim, cfg.seed + n);
    double sink = 0.0;
    const double t = min_seconds(cfg.repeats, [&] {
      sink += loss_fast(inst.nodes, inst.communities, inst.partition, inst.coarse, loss_cfg).loss;
    });
    const double d = static_cast<double>(cfg.loss_dim);
    const double m = static_cast<double>(cfg.communities);
    report.fast_loss.push_back({n, t, 8.0 * (3.0 * n * d + 4.0 * n + 3.0 * m * d + 3.0 * m * m)});
    if (!std::isfinite(sink)) throw NumericalError("bench: fast loss not finite");
  }
  for (Index n : cfg.naive_grid) {
    const LossInstance inst = loss_instance(n, cfg.communities, cfg.naive_dim, cfg.seed + n);
    double sink = 0.0;
    const double t = min_seconds(std::min(cfg.repeats, 3), [&] {
      sink += loss_oracle(inst.nodes, inst.communities, inst.partition, inst.coarse, loss_cfg);
    });
    const double d = static_cast<double>(cfg.naive_dim);
    const double m = static_cast<double>(cfg.communities);
    report.naive_loss.push_back({n, t, 8.0 * (n * d + m * m + m)});
    if (!std::isfinite(sink)) throw NumericalError("bench: oracle loss not finite");
  }
  for (Index n : cfg.inference_grid) {
    const SbmSpec spec = sbm_with_degree(n, 16, cfg.mean_degree, 0.8);
    std::mt19937_64 rng(cfg.seed + 7 * n);
    const SparseGraph g(sbm_edges(spec, cfg.seed + n), gaussian(n, cfg.feature_dim, rng));
    const Matrix w = gaussian(cfg.feature_dim, cfg.inference_dim, rng) /
                     std::sqrt(static_cast<double>(cfg.feature_dim));
    const DistillMlp mlp = init_mlp(cfg.inference_dim, cfg.inference_dim, cfg.seed + 3);

    const std::uint64_t before_mlp = g.adjacency_touches();
    const double t_mlp = min_seconds(cfg.repeats, [&] {
      final_representation(g, w, &mlp, cfg.hops, Activation::relu);
    });
    report.mlp_adjacency_touches += g.adjacency_touches() - before_mlp;

    const std::uint64_t before_gnn = g.adjacency_touches();
    const double t_gnn = min_seconds(cfg.repeats, [&] {
      final_representation(g, w, nullptr, cfg.hops, Activation::relu);
    });
    report.gnn_adjacency_touches += g.adjacency_touches() - before_gnn;

    const double d = static_cast<double>(cfg.inference_dim);
    const double nnz = 2.0 * static_cast<double>(g.num_edges()) + static_cast<double>(n);
    report.mlp_inference.push_back({n, t_mlp, 8.0 * (3.0 * n * d)});
    report.gnn_inference.push_back({n, t_gnn, 8.0 * (1.5 * nnz + 3.0 * n * d)});
  }
  return report;
}

json to_json(const BenchReport& report) {
  auto points = [](const std::vector<BenchPoint>& v) {
    json a = json::array();
    for (const BenchPoint& p : v) a.push_back({{"n", p.n}, {"seconds", p.seconds}, {"peak_bytes", p.peak_bytes}});
    return a;
  };
  return {{"fast_loss", points(report.fast_loss)},
          {"naive_loss", points(report.naive_loss)},
          {"gnn_inference", points(report.gnn_inference)},
          {"mlp_inference", points(report.mlp_inference)},
          {"mlp_adjacency_touches", report.mlp_adjacency_touches},
          {"gnn_adjacency_touches", report.gnn_adjacency_touches}};
}

}  // namespace dkgccl
