#include "tslasso/tangent.hpp"

#include "tslasso/errors.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace tslasso {

Eigen::VectorXd weighted_mean(const Eigen::MatrixXd& local_points, std::span<const double> weights) {
  if (static_cast<Index>(weights.size()) != local_points.rows()) {
    throw ShapeError("weighted_mean: weight count does not match point count");
  }
  const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Index>(weights.size()));
  const double total = w.sum();
  if (!(total > 0.0)) throw DegenerateWeights("all kernel weights are zero");
  return (local_points.transpose() * w) / total;
}

void canonicalize_signs(Eigen::MatrixXd& basis) {
  for (Index c = 0; c < basis.cols(); ++c) {
    Index arg = 0;
    basis.col(c).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, c) < 0.0) basis.col(c) = -basis.col(c);
  }
}

TangentFrame tangent_space_basis(const Eigen::MatrixXd& local_points, Index d, const KernelSpec& spec,
                                 const Eigen::VectorXd& center) {
  const Index k = local_points.rows();
  const Index D = local_points.cols();
  if (d < 1) throw ConfigError("intrinsic dimension must be >= 1");
  if (center.size() != D) throw ShapeError("tangent_space_basis: center has wrong dimension");
  if (d > D) throw RankDeficient("intrinsic dimension exceeds ambient dimension");
  if (k < d) {
    throw RankDeficient("only " + std::to_string(k) + " neighbors for intrinsic dimension " +
                        std::to_string(d));
  }

  std::vector<double> dist(static_cast<std::size_t>(k));
  for (Index j = 0; j < k; ++j) dist[static_cast<std::size_t>(j)] = (local_points.row(j).transpose() - center).norm();
  const std::vector<double> w = kernel_weights(dist, spec);
  const Eigen::VectorXd mean = weighted_mean(local_points, w);

  Eigen::MatrixXd z = local_points.rowwise() - mean.transpose();
  for (Index j = 0; j < k; ++j) z.row(j) *= std::sqrt(w[static_cast<std::size_t>(j)]);

  Eigen::BDCSVD<Eigen::MatrixXd> svd(z, Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double sigma_max = sigma.size() > 0 ? sigma(0) : 0.0;
  Index numeric_rank = 0;
  for (Index c = 0; c < sigma.size(); ++c) {
    if (sigma(c) > 1e-12 * sigma_max) ++numeric_rank;
  }
  if (sigma_max <= 0.0 || numeric_rank < d) {
    throw RankDeficient("weighted difference matrix has numerical rank " + std::to_string(numeric_rank) +
                        " < " + std::to_string(d));
  }

  TangentFrame frame;
  frame.basis = svd.matrixV().leftCols(d);
  canonicalize_signs(frame.basis);
  frame.singular_values = sigma.head(d).array().square();
  const double next = sigma.size() > d ? sigma(d) * sigma(d) : 0.0;
  frame.spectral_gap = frame.singular_values(d - 1) - next;
  frame.neighbor_count = k;
  return frame;
}

TangentFrame estimate_tangent(const PointCloud& cloud, Index center, Index d, double radius,
                              const KernelSpec& spec) {
  const NeighborSet nb = radius_neighbors(cloud, center, radius);
  Eigen::MatrixXd local(static_cast<Index>(nb.members.size()), cloud.dim());
  for (std::size_t r = 0; r < nb.members.size(); ++r) local.row(static_cast<Index>(r)) = cloud.points().row(nb.members[r]);
  TangentFrame frame = tangent_space_basis(local, d, spec, cloud.point(center));
  frame.center = center;
  return frame;
}

}  // namespace tslasso
