#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dkgccl/graph.hpp"
#include "dkgccl/matrix.hpp"

namespace dkgccl::testing {

// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("dkgccl_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

using EdgeList = std::vector<std::pair<NodeId, NodeId>>;

inline SparseGraph graph_with_dim(const EdgeList& edges, Index n, Index h = 1) {
  return SparseGraph(edges, Matrix::Zero(n, h));
}

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

inline EdgeList two_triangles() { return {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}}; }

inline EdgeList complete_graph(Index n) {
  EdgeList e;
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) e.emplace_back(i, j);
  }
  return e;
}

inline std::filesystem::path source_dir() { return DKGCCL_SOURCE_DIR; }

}  // namespace dkgccl::testing
