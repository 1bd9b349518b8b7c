#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace tslasso {

using Index = Eigen::Index;

/// n x D sample matrix; row i is one point in ambient space. Immutable after
/// construction so it can be shared across threads.
class PointCloud {
 public:
  PointCloud() = default;
  /// Throws FormatError if empty or any entry is non-finite.
  explicit PointCloud(Eigen::MatrixXd points);

  const Eigen::MatrixXd& points() const { return points_; }
  Index n() const { return points_.rows(); }
  Index dim() const { return points_.cols(); }
  Eigen::VectorXd point(Index i) const { return points_.row(i).transpose(); }

 private:
  Eigen::MatrixXd points_;
};

struct NeighborSet {
  Index center = 0;
  std::vector<Index> members;     // ascending, includes center
  std::vector<double> distances;  // matches members
};

enum class KernelKind { kConstant, kEpanechnikov, kGaussian };

struct KernelSpec {
  KernelKind kind = KernelKind::kGaussian;
  double bandwidth = 1.0;
};

KernelKind parse_kernel_kind(const std::string& name);
std::string to_string(KernelKind kind);

enum class MatrixFormat { kCsv, kRawF64 };

/// raw-binary-f64 layout: u64 n, u64 D (little-endian) then n*D doubles,
/// row-major.
PointCloud load_matrix(const std::filesystem::path& path, MatrixFormat format,
                       bool skip_header = false);
/// Picks the format from the extension: ".csv" is CSV, anything else raw.
PointCloud load_matrix(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  MatrixFormat format);

/// Reads a raw-binary-f64 matrix without the PointCloud checks.
Eigen::MatrixXd read_raw_f64(const std::filesystem::path& path);

/// Exact brute-force scan: every j with ||x_center - x_j|| <= radius.
NeighborSet radius_neighbors(const PointCloud& cloud, Index center, double radius);

/// K(u) evaluated at u = distance / bandwidth, zero for u > 1.
double kernel_value(KernelKind kind, double u);
std::vector<double> kernel_weights(std::span<const double> distances, const KernelSpec& spec);

}  // namespace tslasso
