#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "dkgccl/errors.hpp"
#include "dkgccl/io.hpp"
#include "dkgccl/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dkgccl;

namespace {

constexpr int kConfigError = 2;
constexpr int kDataError = 3;
constexpr int kNumericalError = 4;

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "runs";
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config, "JSON run configuration");
  if (config_required) c->required();
  cmd->add_option("--seed", opts.seed, "override train.seed");
  cmd->add_option("--out", opts.out, "root directory for run artifacts")->capture_default_str();
}

RunConfig config_from(const CommonOptions& opts) {
  RunConfig cfg = load_run_config(opts.config);
  if (opts.seed) cfg.train.seed = *opts.seed;
  return cfg;
}

int fail(const char* kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << "\n";
  return code;
}

void print(const json& j) { std::cout << j.dump(2) << "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-kernel graph community contrastive learning"};
  app.require_subcommand(1);

  CommonOptions opts;
  std::string embed_path = "gnn";
  std::string eval_task;

  auto* partition = app.add_subcommand("partition", "partition the graph and write partition.txt");
  add_common(partition, opts);
  auto* train = app.add_subcommand("train", "stage-1 contrastive training of W_G and W_P");
  add_common(train, opts);
  auto* distill = app.add_subcommand("distill", "stage-2 distillation of the propagated target");
  add_common(distill, opts);
  auto* embed = app.add_subcommand("embed", "write final node representations");
  add_common(embed, opts);
  embed->add_option("--path", embed_path, "gnn (propagated) or mlp (distilled)")
      ->check(CLI::IsMember({"gnn", "mlp"}))
      ->capture_default_str();
  auto* eval = app.add_subcommand("eval", "evaluate stored embeddings");
  add_common(eval, opts);
  eval->add_option("--task", eval_task, "classify, cluster or both (default: eval.task)")
      ->check(CLI::IsMember({"classify", "cluster", "both"}));
  auto* bench = app.add_subcommand("bench", "timing benchmark on synthetic block-model graphs");
  add_common(bench, opts, false);
  auto* run = app.add_subcommand("run", "full pipeline: partition, train, distill, embed, eval");
  add_common(run, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (bench->parsed()) {
      BenchConfig bc;
      if (!opts.config.empty()) bc = config_from(opts).bench;
      if (opts.seed) bc.seed = *opts.seed;
      const json report = to_json(run_bench(bc));
      io::write_text(fs::path(opts.out) / "bench.json", report.dump(2) + "\n");
      print(report);
      return 0;
    }

    const RunConfig cfg = config_from(opts);
    const RunPaths paths = run_paths(opts.out, cfg);
    json summary = {{"run_dir", paths.dir.string()},
                    {"config_digest", io::hex_digest(cfg.digest())}};

    if (run->parsed()) {
      run_pipeline(cfg, opts.out);
      if (fs::exists(paths.metrics)) summary["metrics"] = json::parse(io::read_text(paths.metrics));
      print(summary);
      return 0;
    }

    const Dataset data = load_dataset(cfg);
    if (partition->parsed()) {
      const Partition p = run_partition_step(cfg, data, paths);
      summary["m"] = p.m;
      summary["edge_cut"] = edge_cut(data.graph, p);
    } else if (train->parsed()) {
      run_train_step(cfg, data, paths);
      summary["encoder"] = paths.encoder.string();
    } else if (distill->parsed()) {
      run_distill_step(cfg, data, paths);
      summary["mlp"] = paths.mlp.string();
    } else if (embed->parsed()) {
      const EmbedPath which = parse_embed_path(embed_path);
      run_embed_step(cfg, data, paths, which);
      summary["embeddings"] =
          (which == EmbedPath::gnn ? paths.embeddings_gnn : paths.embeddings_mlp).string();
    } else if (eval->parsed()) {
      const EvalTask task = eval_task.empty() ? cfg.eval.task : parse_eval_task(eval_task);
      summary["metrics"] = run_eval_step(cfg, data, paths, task);
    }
    print(summary);
    return 0;
  } catch (const ConfigError& e) {
    return fail("config", e.what(), kConfigError);
  } catch (const ArgumentError& e) {
    return fail("config", e.what(), kConfigError);
  } catch (const InputError& e) {
    return fail("data", e.what(), kDataError);
  } catch (const NumericalError& e) {
    return fail("numerical", e.what(), kNumericalError);
  } catch (const UndefinedError& e) {
    return fail("numerical", e.what(), kNumericalError);
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("data", e.what(), kDataError);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), EXIT_FAILURE);
  }
}
