#include "dgcca/serialize.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "dgcca/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary containers are written little-endian via raw stores");

namespace dgcca {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path.string());
  return in;
}

template <typename T>
void put(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <typename T>
T take(std::ifstream& in, const std::filesystem::path& path) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) throw DataError("truncated file: " + path.string());
  return value;
}

void put_magic(std::ofstream& out, const char magic[4]) { out.write(magic, 4); }

void check_magic(std::ifstream& in, const char magic[4],
                 const std::filesystem::path& path) {
  char buf[4];
  in.read(buf, 4);
  if (!in || std::memcmp(buf, magic, 4) != 0) {
    throw DataError("bad magic bytes (expected " + std::string(magic, 4) + "): " +
                    path.string());
  }
}

void check_version(std::uint32_t version, const std::filesystem::path& path) {
  if (version != kFormatVersion) {
    throw DataError("unsupported format version " + std::to_string(version) +
                    " in " + path.string());
  }
}

void put_matrix_payload(std::ofstream& out, const Matrix& m) {
  // Row-major on disk; Eigen stores column-major in memory.
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(sizeof(double) * rm.size()));
}

Matrix take_matrix_payload(std::ifstream& in, std::uint64_t rows, std::uint64_t cols,
                           const std::filesystem::path& path) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  RowMajor rm(static_cast<Index>(rows), static_cast<Index>(cols));
  in.read(reinterpret_cast<char*>(rm.data()),
          static_cast<std::streamsize>(sizeof(double) * rm.size()));
  if (!in) throw DataError("truncated matrix payload: " + path.string());
  return Matrix(rm);
}

void check_no_trailing(std::ifstream& in, const std::filesystem::path& path) {
  in.peek();
  if (!in.eof()) throw DataError("trailing bytes after payload: " + path.string());
}

}  // namespace

void write_matrix_mvmx(const std::filesystem::path& path, const Matrix& m) {
  if (m.rows() < 1 || m.cols() < 1) {
    throw DataError("refusing to write empty matrix: " + path.string());
  }
  auto out = open_out(path);
  put_magic(out, "MVMX");
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
  put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
  put_matrix_payload(out, m);
  if (!out) throw DataError("write failed: " + path.string());
}

Matrix read_matrix_mvmx(const std::filesystem::path& path) {
  auto in = open_in(path);
  check_magic(in, "MVMX", path);
  check_version(take<std::uint32_t>(in, path), path);
  const auto rows = take<std::uint64_t>(in, path);
  const auto cols = take<std::uint64_t>(in, path);
  if (rows < 1 || cols < 1 || rows > (1ull << 32) || cols > (1ull << 32)) {
    throw DataError("implausible matrix shape in header: " + path.string());
  }
  Matrix m = take_matrix_payload(in, rows, cols, path);
  check_no_trailing(in, path);
  return m;
}

void write_labels(const std::filesystem::path& path,
                  const std::vector<std::int32_t>& labels) {
  auto out = open_out(path);
  put_magic(out, "MVLB");
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, labels.size());
  out.write(reinterpret_cast<const char*>(labels.data()),
            static_cast<std::streamsize>(sizeof(std::int32_t) * labels.size()));
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<std::int32_t> read_labels(const std::filesystem::path& path) {
  auto in = open_in(path);
  check_magic(in, "MVLB", path);
  check_version(take<std::uint32_t>(in, path), path);
  const auto count = take<std::uint64_t>(in, path);
  std::vector<std::int32_t> labels(count);
  in.read(reinterpret_cast<char*>(labels.data()),
          static_cast<std::streamsize>(sizeof(std::int32_t) * count));
  if (!in) throw DataError("truncated label payload: " + path.string());
  check_no_trailing(in, path);
  return labels;
}

void write_network(const std::filesystem::path& path, const MlpNetwork& net) {
  validate(net);
  auto out = open_out(path);
  put_magic(out, "MVNN");
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.hidden_activation));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.depth()));
  for (Index w : net.layer_widths) put<std::uint64_t>(out, static_cast<std::uint64_t>(w));
  for (std::size_t k = 0; k < net.depth(); ++k) {
    put_matrix_payload(out, net.weights[k]);
    out.write(reinterpret_cast<const char*>(net.biases[k].data()),
              static_cast<std::streamsize>(sizeof(double) * net.biases[k].size()));
  }
  if (!out) throw DataError("write failed: " + path.string());
}

MlpNetwork read_network(const std::filesystem::path& path) {
  auto in = open_in(path);
  check_magic(in, "MVNN", path);
  check_version(take<std::uint32_t>(in, path), path);
  const auto activation = take<std::uint32_t>(in, path);
  if (activation > static_cast<std::uint32_t>(Activation::tanh)) {
    throw DataError("unknown activation id in " + path.string());
  }
  const auto depth = take<std::uint32_t>(in, path);
  if (depth < 1 || depth > 1024) {
    throw DataError("implausible layer count in " + path.string());
  }
  MlpNetwork net;
  net.hidden_activation = static_cast<Activation>(activation);
  for (std::uint32_t i = 0; i <= depth; ++i) {
    const auto w = take<std::uint64_t>(in, path);
    if (w < 1 || w > (1ull << 32)) {
      throw DataError("implausible layer width in " + path.string());
    }
    net.layer_widths.push_back(static_cast<Index>(w));
  }
  for (std::uint32_t k = 0; k < depth; ++k) {
    const Index rows = net.layer_widths[k + 1];
    const Index cols = net.layer_widths[k];
    net.weights.push_back(take_matrix_payload(
        in, static_cast<std::uint64_t>(rows), static_cast<std::uint64_t>(cols), path));
    Vector b(rows);
    in.read(reinterpret_cast<char*>(b.data()),
            static_cast<std::streamsize>(sizeof(double) * b.size()));
    if (!in) throw DataError("truncated bias payload: " + path.string());
    net.biases.push_back(std::move(b));
  }
  check_no_trailing(in, path);
  validate(net);
  return net;
}

namespace {

bool parse_csv_line(const std::string& line, std::vector<double>& values) {
  values.clear();
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    std::string field = line.substr(pos, comma - pos);
    // trim whitespace
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    field = (first == std::string::npos) ? "" : field.substr(first, last - first + 1);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc() || end != field.data() + field.size()) return false;
    values.push_back(value);
    pos = comma + 1;
  }
  return true;
}

}  // namespace

Matrix read_matrix_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::vector<double> values;
    if (!parse_csv_line(line, values)) {
      if (first) {
        first = false;  // header row
        continue;
      }
      throw DataError("unparsable CSV row in " + path.string() + ": " + line);
    }
    first = false;
    if (!rows.empty() && values.size() != rows[0].size()) {
      throw DataError("ragged CSV rows in " + path.string());
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw DataError("CSV has no data rows: " + path.string());
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return m;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  std::ostringstream line;
  line.precision(17);
  for (Index i = 0; i < m.rows(); ++i) {
    line.str("");
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) line << ',';
      line << m(i, j);
    }
    line << '\n';
    out << line.str();
  }
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace dgcca
