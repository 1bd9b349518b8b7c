#pragma once

#include "tslasso/pointcloud.hpp"

#include <Eigen/Core>

#include <span>

namespace tslasso {

struct TangentFrame {
  Index center = 0;
  Eigen::MatrixXd basis;            // D x d, orthonormal columns
  Eigen::VectorXd singular_values;  // top-d eigenvalues of Z^T Z, descending
  /// lambda_d - lambda_{d+1}; equals lambda_d when D == d or k == d.
  double spectral_gap = 0.0;
  Index neighbor_count = 0;
};

/// (sum_j w_j x_j) / (sum_j w_j). Rows of `local_points` are the samples.
Eigen::VectorXd weighted_mean(const Eigen::MatrixXd& local_points, std::span<const double> weights);

/// Weighted local PCA. `center` is the point the kernel distances are measured
/// from; the weighted mean is subtracted before the SVD.
///
/// Throws DegenerateWeights when every kernel weight is zero and RankDeficient
/// when fewer than d singular values exceed 1e-12 * sigma_max.
TangentFrame tangent_space_basis(const Eigen::MatrixXd& local_points, Index d, const KernelSpec& spec,
                                 const Eigen::VectorXd& center);

/// Convenience wrapper: neighbors of `center` within `radius` in the full
/// cloud, then tangent_space_basis on them.
TangentFrame estimate_tangent(const PointCloud& cloud, Index center, Index d, double radius,
                              const KernelSpec& spec);

/// Flip each column so its largest-magnitude entry is positive.
void canonicalize_signs(Eigen::MatrixXd& basis);

}  // namespace tslasso
