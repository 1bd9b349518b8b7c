#pragma once

#include "tslasso/grouplasso.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <vector>

namespace tslasso {

/// Sampled recovery-condition quantities. All maxima/minima run over the
/// subsample points, so these are finite-sample stand-ins for the manifold
/// suprema and infima.
struct DiagnosticsReport {
  Eigen::MatrixXd cosine_matrix;
  std::vector<Index> support;
  double mu_s = 0.0;     // S-incoherence
  double nu_s = 0.0;     // internal colinearity
  double b_s = 0.0;      // smallest row norm of X_{iS}^{-1}
  double phi_s = 0.0;    // largest gradient norm inside S
  double gamma_max = 0.0;  // Gamma: largest gradient norm overall
  double delta = 0.0;    // smallest gradient norm overall
  /// (1 + nu/delta^2)^2 mu phi Gamma d
  double incoherence_value = 0.0;
  bool incoherence_ok = false;
  /// lambda (1 + nu/delta^2)^2 and b sqrt(n)/2, when lambda was given
  std::optional<double> lambda;
  double lambda_lhs = 0.0;
  double lambda_rhs = 0.0;
  bool lambda_ok = false;
  bool complement_empty = false;
};

/// (j, j') -> mean over points of |cos angle(X_i(:, j), X_i(:, j'))|. Pairs
/// touching a column that vanishes at some point are NaN; the diagonal is 1.
Eigen::MatrixXd cosine_matrix(const ProjectedDesign& design);

/// `gradient_norms` is n x p: norms of the unprojected gradients in the same
/// scaling as the design. Throws RankDeficient (listing the points) when some
/// X_{iS} has sigma_min < 1e-8 sigma_max, ConfigError when |S| != d.
DiagnosticsReport sampled_conditions(const ProjectedDesign& design, const std::vector<Index>& support_set,
                                     const Eigen::MatrixXd& gradient_norms,
                                     std::optional<double> lambda = std::nullopt);

nlohmann::json to_json(const DiagnosticsReport& report, const std::vector<std::string>& names);

/// Square matrix as CSV; NaN entries are written as "nan".
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& header = {});

}  // namespace tslasso
