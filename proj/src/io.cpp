#include "dkgccl/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dkgccl/errors.hpp"

namespace dkgccl::io {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path,
                       std::ios::openmode mode = std::ios::out | std::ios::trunc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view token, const std::filesystem::path& path, std::size_t line) {
  token = trim(token);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": not a number: '" +
                     std::string(token) + "'");
  }
  return value;
}

long long parse_integer(std::string_view token, const std::filesystem::path& path,
                        std::size_t line) {
  token = trim(token);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(path.string() + ":" + std::to_string(line) + ": not an integer: '" +
                     std::string(token) + "'");
  }
  return value;
}

bool is_binary_path(const std::filesystem::path& path) { return path.extension() == ".bin"; }

}  // namespace

void write_matrix_binary(const std::filesystem::path& path, const Matrix& m,
                         std::optional<std::uint64_t> digest) {
  if (m.rows() > std::numeric_limits<std::uint32_t>::max() ||
      m.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw ArgumentError("matrix too large for the binary format");
  }
  auto out = open_out(path, std::ios::out | std::ios::binary | std::ios::trunc);
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(m.rows()),
                                   static_cast<std::uint32_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(m.size() * sizeof(double)));
  if (digest) out.write(reinterpret_cast<const char*>(&*digest), sizeof(std::uint64_t));
  if (!out) throw InputError("write failed: " + path.string());
}

BinaryMatrix read_matrix_binary(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  std::uint32_t header[2] = {0, 0};
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!in) throw InputError(path.string() + ": truncated header");
  const auto file_size = std::filesystem::file_size(path);
  const std::uint64_t payload = std::uint64_t{header[0]} * header[1] * sizeof(double);
  const std::uint64_t expected = sizeof(header) + payload;
  if (file_size != expected && file_size != expected + sizeof(std::uint64_t)) {
    throw InputError(path.string() + ": size " + std::to_string(file_size) +
                     " does not match header " + std::to_string(header[0]) + "x" +
                     std::to_string(header[1]));
  }
  BinaryMatrix result;
  result.values.resize(header[0], header[1]);
  in.read(reinterpret_cast<char*>(result.values.data()), static_cast<std::streamsize>(payload));
  if (file_size == expected + sizeof(std::uint64_t)) {
    std::uint64_t digest = 0;
    in.read(reinterpret_cast<char*>(&digest), sizeof(digest));
    result.digest = digest;
  }
  if (!in) throw InputError(path.string() + ": truncated payload");
  return result;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << m(i, j);
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<double> values;
  Index cols = -1;
  Index rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    Index count = 0;
    std::size_t start = 0;
    while (true) {
      const auto comma = view.find(',', start);
      const auto token = view.substr(start, comma == std::string_view::npos ? view.npos : comma - start);
      values.push_back(parse_double(token, path, line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cols < 0) cols = count;
    if (count != cols) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(cols) + " columns, found " + std::to_string(count));
    }
    ++rows;
  }
  Matrix m(rows, std::max<Index>(cols, 0));
  if (!values.empty()) std::memcpy(m.data(), values.data(), values.size() * sizeof(double));
  return m;
}

Matrix read_matrix(const std::filesystem::path& path) {
  return is_binary_path(path) ? read_matrix_binary(path).values : read_matrix_csv(path);
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  if (is_binary_path(path)) {
    write_matrix_binary(path, m);
  } else {
    write_matrix_csv(path, m);
  }
}

std::vector<std::pair<NodeId, NodeId>> read_edge_list(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto split = view.find_first_of(" \t,");
    if (split == std::string_view::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected \"u v\"");
    }
    const auto rest = trim(view.substr(split + 1));
    edges.emplace_back(parse_integer(view.substr(0, split), path, line_no),
                       parse_integer(rest, path, line_no));
  }
  return edges;
}

LabelVector read_labels(const std::filesystem::path& path) {
  std::vector<int> labels;
  if (is_binary_path(path)) {
    const auto m = read_matrix_binary(path).values;
    if (m.cols() != 1) throw InputError(path.string() + ": labels must have one column");
    for (Index i = 0; i < m.rows(); ++i) {
      const double v = m(i, 0);
      if (v != static_cast<int>(v)) throw ParseError(path.string() + ": non-integer label");
      labels.push_back(static_cast<int>(v));
    }
  } else {
    auto in = open_in(path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const auto view = trim(line);
      if (view.empty()) continue;
      labels.push_back(static_cast<int>(parse_integer(view, path, line_no)));
    }
  }
  return LabelVector::from_labels(std::move(labels));
}

void write_labels(const std::filesystem::path& path, const LabelVector& labels) {
  auto out = open_out(path);
  for (int l : labels.labels) out << l << '\n';
}

SplitSpec read_splits(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  SplitSpec split;
  auto take = [&](const char* key, std::vector<Index>& into) {
    if (!doc.contains(key) || !doc[key].is_array()) {
      throw InputError(path.string() + ": missing array \"" + key + "\"");
    }
    for (const auto& v : doc[key]) {
      if (!v.is_number_integer()) throw ParseError(path.string() + ": non-integer index");
      into.push_back(v.get<Index>());
    }
  };
  take("train", split.train);
  take("valid", split.valid);
  take("test", split.test);
  return split;
}

void write_splits(const std::filesystem::path& path, const SplitSpec& split) {
  nlohmann::json doc = {{"train", split.train}, {"valid", split.valid}, {"test", split.test}};
  write_text(path, doc.dump() + "\n");
}

std::string read_text(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::in | std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path, std::ios::out | std::ios::binary | std::ios::trunc);
  out << text;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t file_hash(const std::filesystem::path& path) { return fnv1a(read_text(path)); }

std::string hex_digest(std::uint64_t digest) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << digest;
  return ss.str();
}

}  // namespace dkgccl::io
