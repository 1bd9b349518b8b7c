#pragma once

// Shared helpers for the test binaries: random designs, an independent
// proximal-gradient group lasso oracle, and small geometry utilities.

#include "tslasso/grouplasso.hpp"
#include "tslasso/random.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <string>

namespace tstest {

using tslasso::Index;

inline Eigen::MatrixXd gaussian_matrix(Index rows, Index cols, tslasso::Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
  return m;
}

inline Eigen::MatrixXd random_orthogonal(Index dim, tslasso::Rng& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian_matrix(dim, dim, rng));
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
  return q;
}

inline tslasso::ProjectedDesign random_design(Index n, Index d, Index p, tslasso::Rng& rng) {
  tslasso::ProjectedDesign x;
  for (Index i = 0; i < n; ++i) {
    x.blocks.push_back(gaussian_matrix(d, p, rng));
    x.point_ids.push_back(i);
  }
  x.gammas = Eigen::VectorXd::Ones(p);
  return x;
}

/// Accelerated proximal gradient (FISTA with adaptive restart) on the same
/// objective, written independently of the library solver. Runs until the
/// iterate stops moving.
inline tslasso::CoefficientField fista_oracle(const tslasso::ProjectedDesign& x, double lambda,
                                              Index max_iter = 400000, double step_tol = 1e-15) {
  const Index n = x.n(), d = x.d(), p = x.p();
  const double mu = lambda / std::sqrt(static_cast<double>(d * n));
  double lip = 0.0;
  for (const auto& xi : x.blocks) {
    const double s = Eigen::JacobiSVD<Eigen::MatrixXd>(xi).singularValues()(0);
    lip = std::max(lip, s * s);
  }
  if (lip == 0.0) return tslasso::CoefficientField::zeros(n, p, d);
  const double step = 1.0 / lip;
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(d, d);

  std::vector<Eigen::MatrixXd> b(n, Eigen::MatrixXd::Zero(p, d)), y = b, prev = b;
  auto smooth = [&](const std::vector<Eigen::MatrixXd>& v) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) s += 0.5 * (eye - x.blocks[i] * v[i]).squaredNorm();
    return s;
  };
  auto full = [&](const std::vector<Eigen::MatrixXd>& v) {
    double pen = 0.0;
    for (Index j = 0; j < p; ++j) {
      double sq = 0.0;
      for (Index i = 0; i < n; ++i) sq += v[i].row(j).squaredNorm();
      pen += std::sqrt(sq);
    }
    return smooth(v) + mu * pen;
  };
  double t = 1.0;
  double f_prev = full(b);
  for (Index it = 0; it < max_iter; ++it) {
    std::vector<Eigen::MatrixXd> z(n);
    for (Index i = 0; i < n; ++i) z[i] = y[i] + step * x.blocks[i].transpose() * (eye - x.blocks[i] * y[i]);
    for (Index j = 0; j < p; ++j) {
      double sq = 0.0;
      for (Index i = 0; i < n; ++i) sq += z[i].row(j).squaredNorm();
      const double nrm = std::sqrt(sq);
      const double shrink = nrm > step * mu ? 1.0 - step * mu / nrm : 0.0;
      for (Index i = 0; i < n; ++i) z[i].row(j) *= shrink;
    }
    prev = b;
    b = z;
    const double f = full(b);
    double move = 0.0;
    for (Index i = 0; i < n; ++i) move = std::max(move, (b[i] - prev[i]).cwiseAbs().maxCoeff());
    if (f > f_prev) {  // restart momentum
      t = 1.0;
      y = b;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      for (Index i = 0; i < n; ++i) y[i] = b[i] + ((t - 1.0) / t_next) * (b[i] - prev[i]);
      t = t_next;
    }
    f_prev = f;
    if (move < step_tol && it > 10) break;
  }
  tslasso::CoefficientField out;
  out.blocks = b;
  out.lambda = lambda;
  return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tslasso_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Frobenius norm of the difference of the orthogonal projectors onto two
/// column spans.
inline double projector_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a * a.transpose() - b * b.transpose()).norm();
}

}  // namespace tstest
