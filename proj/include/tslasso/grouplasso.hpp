#pragma once

#include "tslasso/errors.hpp"
#include "tslasso/pointcloud.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <vector>

namespace tslasso {

/// Per-point projected gradients X_i = T_i^T [grad f_1 ... grad f_p], each
/// d x p, plus the normalization scales used to build them.
struct ProjectedDesign {
  std::vector<Eigen::MatrixXd> blocks;
  Eigen::VectorXd gammas;
  std::vector<Index> point_ids;

  Index n() const { return static_cast<Index>(blocks.size()); }
  Index d() const { return blocks.empty() ? 0 : blocks.front().rows(); }
  Index p() const { return blocks.empty() ? 0 : blocks.front().cols(); }
  /// Throws ShapeError on mismatched or non-finite blocks.
  void validate() const;
};

/// Coefficient blocks B_i (p x d). Group j is row j of every block.
struct CoefficientField {
  std::vector<Eigen::MatrixXd> blocks;
  double lambda = 0.0;

  static CoefficientField zeros(Index n, Index p, Index d);
  Index n() const { return static_cast<Index>(blocks.size()); }
  Index p() const { return blocks.empty() ? 0 : blocks.front().rows(); }
  Index d() const { return blocks.empty() ? 0 : blocks.front().cols(); }
  /// sqrt(sum_i ||row j of B_i||^2)
  double group_norm(Index j) const;
  Eigen::VectorXd group_norms() const;
};

struct SolveReport {
  std::vector<double> objective_trace;  // initial value, then one per sweep
  Index iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

struct SolverOptions {
  double tol = 1e-8;
  Index max_iter = 20000;
};

struct SolveResult {
  CoefficientField coefficients;
  SolveReport report;
};

class NotConverged : public Error {
 public:
  NotConverged(const std::string& what, SolveResult partial_result)
      : Error(what), partial(std::move(partial_result)) {}
  SolveResult partial;
};

/// 1/2 sum_i ||I - X_i B_i||_F^2 + lambda / sqrt(d n) sum_j ||B_.j||_2.
double objective(const CoefficientField& coefficients, const ProjectedDesign& design, double lambda);

/// Cyclic block coordinate descent over the p groups. Each group update is
/// the exact minimizer of the objective in that group. Stops once a sweep
/// moves no group by more than `tol` and the KKT residual is at most `tol`.
///
/// Throws NotConverged (carrying the last iterate) after max_iter sweeps.
SolveResult solve(const ProjectedDesign& design, double lambda, const SolverOptions& options = {},
                  const CoefficientField* warm_start = nullptr);

struct KktResult {
  bool pass = false;
  double max_residual = 0.0;
};

/// Stationarity of the group lasso objective. With g_j the concatenation over
/// i of X_i(:, j)^T (I - X_i B_i): active groups need
/// ||g_j - mu B_.j / ||B_.j|| || <= tol, zero groups ||g_j|| <= mu + tol, where
/// mu = lambda / sqrt(d n).
KktResult kkt_check(const CoefficientField& coefficients, const ProjectedDesign& design, double lambda, double tol);

/// Smallest lambda for which B = 0 is optimal: sqrt(d n) max_j ||g_j at B=0||.
double lambda_zero(const ProjectedDesign& design);

/// Groups with norm above zero_tol, ascending.
std::vector<Index> support(const CoefficientField& coefficients, double zero_tol = 1e-8);

struct PathPoint {
  double lambda = 0.0;
  std::vector<Index> support;
  Eigen::VectorXd group_norms;
};

enum class LambdaRule { kBinarySearch, kLastSurviving };

LambdaRule parse_lambda_rule(const std::string& name);
std::string to_string(LambdaRule rule);

struct PathOptions {
  SolverOptions solver;
  double zero_tol = 1e-8;
  /// bisection stops once the bracket is narrower than rel_tol * lambda_0
  double rel_tol = 1e-3;
  Index max_probes = 60;
  /// grid size for the last-surviving rule and for exported paths
  Index grid_size = 100;
  bool warm_start = true;
};

struct PathResult {
  double lambda_star = 0.0;
  double lambda_zero = 0.0;
  std::vector<Index> support;
  std::vector<PathPoint> path;  // every probed lambda, in probe order
  /// true when no probed lambda gave exactly d_target groups
  bool unreachable = false;
  CoefficientField solution;
};

/// Bisection on [0, lambda_0] for the largest lambda whose support has exactly
/// d_target groups, warm-starting each solve from the previous probe. When the
/// support size jumps over d_target, returns the probe with the smallest size
/// >= d_target (largest lambda among ties) and sets `unreachable`.
PathResult path_search(const ProjectedDesign& design, Index d_target, const PathOptions& options = {});

/// Walks a descending lambda grid from lambda_0 and keeps the d_target groups
/// that stay nonzero up to the largest lambda (ties: larger norm, then lower
/// index).
PathResult last_surviving(const ProjectedDesign& design, Index d_target, const PathOptions& options = {});

PathResult select_support(const ProjectedDesign& design, Index d_target, LambdaRule rule,
                          const PathOptions& options = {});

/// Solutions on a descending grid lambda_0 * (1 - k / grid_size), k = 0..grid_size-1.
std::vector<PathPoint> regularization_path(const ProjectedDesign& design, const PathOptions& options = {});

/// CSV with header "lambda,group_index,group_norm", one row per (lambda, group).
void write_path_csv(const std::filesystem::path& path, const std::vector<PathPoint>& points);

}  // namespace tslasso
