#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dkgccl/distill.hpp"
#include "dkgccl/errors.hpp"
#include "dkgccl/evaluate.hpp"
#include "dkgccl/io.hpp"
#include "dkgccl/loss.hpp"
#include "dkgccl/partition.hpp"
#include "dkgccl/pipeline.hpp"

namespace py = pybind11;
using namespace dkgccl;

namespace {

LossConfig make_loss_config(const std::string& variant, double alpha, double tau,
                            const std::string& feature_map, bool include_self) {
  LossConfig cfg;
  cfg.variant = parse_variant(variant);
  cfg.alpha = alpha;
  cfg.tau = tau;
  cfg.feature_map = parse_feature_map(feature_map);
  cfg.include_self_community = include_self;
  cfg.validate();
  return cfg;
}

std::vector<std::pair<NodeId, NodeId>> edge_pairs(const Eigen::Matrix<NodeId, Eigen::Dynamic, 2, Eigen::RowMajor>& e) {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(static_cast<std::size_t>(e.rows()));
  for (Index i = 0; i < e.rows(); ++i) out.emplace_back(e(i, 0), e(i, 1));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Dual-kernel graph community contrastive learning";

  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  static py::exception<InputError> input_error(m, "InputError", PyExc_OSError);
  static py::exception<NumericalError> numerical_error(m, "NumericalError", PyExc_ArithmeticError);
  static py::exception<UndefinedError> undefined_error(m, "UndefinedError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const InputError& e) {
      input_error(e.what());
    } catch (const NumericalError& e) {
      numerical_error(e.what());
    } catch (const UndefinedError& e) {
      undefined_error(e.what());
    }
  });

  m.def(
      "loss",
      [](const Matrix& nodes, const Matrix& communities, std::vector<Index> assignment, const Matrix& coarse,
         const std::string& variant, double alpha, double tau, const std::string& feature_map, bool include_self,
         bool oracle) -> py::tuple {
        const LossConfig cfg = make_loss_config(variant, alpha, tau, feature_map, include_self);
        const Partition p = Partition::from_assignment(std::move(assignment));
        if (oracle) return py::make_tuple(loss_oracle(nodes, communities, p, coarse, cfg), 0);
        const LossResult r = loss_fast(nodes, communities, p, coarse, cfg);
        return py::make_tuple(r.loss, r.clamped);
      },
      py::arg("nodes"), py::arg("communities"), py::arg("assignment"), py::arg("coarse"),
      py::arg("variant") = "linear_combination", py::arg("alpha") = 0.5, py::arg("tau") = 0.5,
      py::arg("feature_map") = "sigmoid", py::arg("include_self_community") = true, py::arg("oracle") = false,
      "Bi-level contrastive loss; returns (loss, clamped numerators).");

  m.def(
      "partition",
      [](const Eigen::Matrix<NodeId, Eigen::Dynamic, 2, Eigen::RowMajor>& edges, Index n, Index communities,
         std::uint64_t seed) {
        const SparseGraph g(edge_pairs(edges), Matrix::Zero(n, 1));
        const Partition p = partition_graph(g, communities, seed);
        return py::make_tuple(p.assignment, edge_cut(g, p));
      },
      py::arg("edges"), py::arg("n"), py::arg("communities"), py::arg("seed") = 0,
      "Partition an undirected graph; returns (assignment, edge cut).");

  m.def(
      "coarsen",
      [](const Eigen::Matrix<NodeId, Eigen::Dynamic, 2, Eigen::RowMajor>& edges, Index n,
         std::vector<Index> assignment, const std::string& normalization) {
        const SparseGraph g(edge_pairs(edges), Matrix::Zero(n, 1));
        return coarsen(g, Partition::from_assignment(std::move(assignment)), parse_normalization(normalization))
            .matrix;
      },
      py::arg("edges"), py::arg("n"), py::arg("assignment"), py::arg("normalization") = "symmetric");

  m.def("nmi", [](std::vector<int> a, std::vector<int> b) { return nmi(a, b); });
  m.def("ari", [](std::vector<int> a, std::vector<int> b) { return ari(a, b); });
  m.def(
      "kmeans",
      [](const Matrix& z, int k, std::uint64_t seed, int restarts) {
        const KMeansResult r = kmeans(z, k, seed, restarts);
        return py::make_tuple(r.assignment, r.centroids, r.inertia);
      },
      py::arg("z"), py::arg("k"), py::arg("seed") = 0, py::arg("restarts") = 10);

  m.def("substructure_count_expectation", &substructure_count_expectation, py::arg("community_dim"),
        py::arg("p"), py::arg("community_size"));

  m.def("read_matrix", [](const std::filesystem::path& path) { return io::read_matrix(path); });

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config, const std::filesystem::path& out, std::optional<std::uint64_t> seed) {
        RunConfig cfg = load_run_config(config);
        if (seed) cfg.train.seed = *seed;
        py::gil_scoped_release release;
        return run_pipeline(cfg, out).dir;
      },
      py::arg("config"), py::arg("out"), py::arg("seed") = py::none(),
      "Partition, train, distill, embed and evaluate; returns the run directory.");

  m.def("config_digest", [](const std::filesystem::path& config) {
    return io::hex_digest(load_run_config(config).digest());
  });
}
