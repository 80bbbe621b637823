#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dkgccl/graph.hpp"
#include "dkgccl/matrix.hpp"

namespace dkgccl::io {

// Binary matrix layout (little-endian):
//   u32 rows, u32 cols            8-byte header
//   f64 payload[rows * cols]      row-major
//   optional u64 config digest    trailer, present on pipeline artifacts
struct BinaryMatrix {
  Matrix values;
  std::optional<std::uint64_t> digest;
};

void write_matrix_binary(const std::filesystem::path& path, const Matrix& m,
                         std::optional<std::uint64_t> digest = std::nullopt);
BinaryMatrix read_matrix_binary(const std::filesystem::path& path);

// CSV: one row per line, comma separated, full round-trip precision.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix_csv(const std::filesystem::path& path);

// Dispatches on the ".bin" extension.
Matrix read_matrix(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& m);

std::vector<std::pair<NodeId, NodeId>> read_edge_list(const std::filesystem::path& path);

// Labels: CSV/text with one integer per line, or a binary n×1 matrix.
LabelVector read_labels(const std::filesystem::path& path);
void write_labels(const std::filesystem::path& path, const LabelVector& labels);

// JSON object with integer arrays "train", "valid", "test".
SplitSpec read_splits(const std::filesystem::path& path);
void write_splits(const std::filesystem::path& path, const SplitSpec& split);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// 64-bit FNV-1a; used for config digests and artifact hashes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t file_hash(const std::filesystem::path& path);
std::string hex_digest(std::uint64_t digest);

}  // namespace dkgccl::io
