#include "tslasso/pointcloud.hpp"

#include "tslasso/errors.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace tslasso {

static_assert(std::endian::native == std::endian::little,
              "raw-binary-f64 I/O assumes a little-endian host");

PointCloud::PointCloud(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1) {
    throw FormatError("point cloud must have at least one row and one column");
  }
  if (!points_.allFinite()) {
    throw FormatError("point cloud contains NaN or Inf");
  }
}

KernelKind parse_kernel_kind(const std::string& name) {
  if (name == "gaussian") return KernelKind::kGaussian;
  if (name == "epanechnikov") return KernelKind::kEpanechnikov;
  if (name == "constant") return KernelKind::kConstant;
  throw ConfigError("unknown kernel '" + name + "' (expected constant, epanechnikov or gaussian)");
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::kConstant:
      return "constant";
    case KernelKind::kEpanechnikov:
      return "epanechnikov";
    case KernelKind::kGaussian:
      return "gaussian";
  }
  return "unknown";
}

namespace {

double parse_cell(const std::string& cell, const std::filesystem::path& path, std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": non-numeric value '" + cell + "'");
  }
  while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
  if (pos != cell.size()) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": non-numeric value '" + cell + "'");
  }
  if (!std::isfinite(v)) {
    throw FormatError(path.string() + ":" + std::to_string(line) + ": non-finite value '" + cell + "'");
  }
  return v;
}

Eigen::MatrixXd read_csv(const std::filesystem::path& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_header && line_no == 1) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ss, cell, ',')) {
      values.push_back(parse_cell(cell, path, line_no));
      ++count;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": ragged row (" +
                        std::to_string(count) + " columns, expected " + std::to_string(cols) + ")");
    }
    ++rows;
  }
  if (rows == 0 || cols == 0) throw FormatError(path.string() + ": empty matrix file");
  Eigen::MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) = values[r * cols + c];
    }
  }
  return m;
}

}  // namespace

Eigen::MatrixXd read_raw_f64(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());
  std::uint64_t header[2] = {0, 0};
  in.read(reinterpret_cast<char*>(header), sizeof(header));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(header))) {
    throw FormatError(path.string() + ": truncated header");
  }
  const std::uint64_t n = header[0];
  const std::uint64_t d = header[1];
  if (n == 0 || d == 0) throw FormatError(path.string() + ": empty matrix");
  if (n > (std::uint64_t{1} << 40) / d) throw FormatError(path.string() + ": implausible shape");
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(
      static_cast<Index>(n), static_cast<Index>(d));
  const auto bytes = static_cast<std::streamsize>(n * d * sizeof(double));
  in.read(reinterpret_cast<char*>(m.data()), bytes);
  if (in.gcount() != bytes) throw FormatError(path.string() + ": truncated data");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after matrix data");
  }
  return m;
}

PointCloud load_matrix(const std::filesystem::path& path, MatrixFormat format, bool skip_header) {
  if (!std::filesystem::exists(path)) throw IOError("no such file: " + path.string());
  Eigen::MatrixXd m = format == MatrixFormat::kCsv ? read_csv(path, skip_header) : read_raw_f64(path);
  if (!m.allFinite()) throw FormatError(path.string() + ": matrix contains NaN or Inf");
  return PointCloud(std::move(m));
}

PointCloud load_matrix(const std::filesystem::path& path) {
  return load_matrix(path, path.extension() == ".csv" ? MatrixFormat::kCsv : MatrixFormat::kRawF64);
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m, MatrixFormat format) {
  if (format == MatrixFormat::kCsv) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot write " + path.string());
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (Index r = 0; r < m.rows(); ++r) {
      for (Index c = 0; c < m.cols(); ++c) {
        if (c) out << ',';
        out << m(r, c);
      }
      out << '\n';
    }
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOError("cannot write " + path.string());
  const std::uint64_t header[2] = {static_cast<std::uint64_t>(m.rows()),
                                   static_cast<std::uint64_t>(m.cols())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  out.write(reinterpret_cast<const char*>(rm.data()),
            static_cast<std::streamsize>(rm.size() * sizeof(double)));
  if (!out) throw IOError("write failed: " + path.string());
}

NeighborSet radius_neighbors(const PointCloud& cloud, Index center, double radius) {
  if (center < 0 || center >= cloud.n()) {
    throw IndexError("neighbor center " + std::to_string(center) + " out of range [0, " +
                     std::to_string(cloud.n()) + ")");
  }
  const auto& x = cloud.points();
  const auto c = x.row(center);
  const double r2 = radius * radius;
  NeighborSet out;
  out.center = center;
  for (Index j = 0; j < cloud.n(); ++j) {
    const double d2 = (x.row(j) - c).squaredNorm();
    // compare in squared space first, then confirm on the actual distance so
    // the membership test is exactly ||.|| <= r
    if (d2 <= r2 * (1.0 + 1e-12)) {
      const double dist = std::sqrt(d2);
      if (dist <= radius || j == center) {
        out.members.push_back(j);
        out.distances.push_back(dist);
      }
    }
  }
  return out;
}

double kernel_value(KernelKind kind, double u) {
  if (!(u <= 1.0)) return 0.0;
  switch (kind) {
    case KernelKind::kConstant:
      return 1.0;
    case KernelKind::kEpanechnikov:
      return 1.0 - u * u;
    case KernelKind::kGaussian:
      return std::exp(-u * u);
  }
  return 0.0;
}

std::vector<double> kernel_weights(std::span<const double> distances, const KernelSpec& spec) {
  std::vector<double> w;
  w.reserve(distances.size());
  for (double dist : distances) w.push_back(kernel_value(spec.kind, dist / spec.bandwidth));
  return w;
}

}  // namespace tslasso
