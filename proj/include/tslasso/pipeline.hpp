#pragma once

#include "tslasso/dictionary.hpp"
#include "tslasso/grouplasso.hpp"
#include "tslasso/pointcloud.hpp"
#include "tslasso/tangent.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tslasso {

enum class NormalizeOver { kSubsample, kAll };

NormalizeOver parse_normalize_over(const std::string& name);
std::string to_string(NormalizeOver over);

struct RunConfig {
  Index d = 2;
  double r_n = 1.0;
  double epsilon_n = 1.0;
  Index n_prime = 100;
  Index omega = 1;
  std::uint64_t seed = 0;
  KernelKind kernel = KernelKind::kGaussian;
  LambdaRule lambda_rule = LambdaRule::kBinarySearch;
  NormalizeOver normalize_over = NormalizeOver::kSubsample;
  PathOptions path;
  unsigned threads = 1;
  /// When non-empty, used instead of a seeded subsample.
  std::vector<Index> subsample;

  /// Throws ConfigError on invalid values for a cloud of n points.
  void validate(Index n) const;
};

/// Per-point record of the tangent estimate.
struct TangentDiagnostics {
  Index point = 0;
  Index neighbor_count = 0;
  double spectral_gap = 0.0;
  Eigen::VectorXd eigenvalues;
};

struct StageTimes {
  double tangent_s = 0.0;
  double gradients_s = 0.0;
  double projection_s = 0.0;
  double solve_s = 0.0;
};

/// Everything upstream of the group lasso for one subsample.
struct DesignBundle {
  ProjectedDesign design;
  std::vector<TangentFrame> frames;
  /// n' x p norms of the normalized ambient (unprojected) gradients
  Eigen::MatrixXd ambient_norms;
  std::vector<Index> subsample;
  StageTimes times;
};

struct RunResult {
  std::vector<Index> support;
  std::vector<std::string> support_names;
  double lambda_star = 0.0;
  double lambda_zero = 0.0;
  /// true when the lambda rule could not produce exactly d functions
  bool flagged = false;
  Eigen::VectorXd gammas;
  std::vector<PathPoint> path;
  std::vector<TangentDiagnostics> tangents;
  /// sigma_min / sigma_max of X_{iS} per subsample point (0 when |S| < d)
  std::vector<double> support_conditioning;
  std::vector<Index> subsample;
  StageTimes times;
};

struct ReplicateOutcome {
  Index replicate = 0;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::vector<Index> support;
  double lambda_star = 0.0;
  bool flagged = false;
};

struct ReplicateSummary {
  /// support key ("name1+name2", or "FAILED") -> count; counts sum to omega
  std::map<std::string, Index> support_counts;
  std::vector<ReplicateOutcome> replicates;
  std::vector<std::string> names;
};

/// gamma_j^2 = mean_i ||grad f_j(x_i)||^2 over the given gradient blocks
/// (each D x p). Throws ZeroGradientFunction when some gamma_j is zero.
Eigen::VectorXd gradient_scales(const std::vector<Eigen::MatrixXd>& gradients);

/// Divides column j of every block by gamma_j; returns the scaled blocks and
/// the gammas.
std::pair<std::vector<Eigen::MatrixXd>, Eigen::VectorXd> normalize(const std::vector<Eigen::MatrixXd>& gradients);

std::vector<Index> draw_subsample(Index n, Index n_prime, std::uint64_t seed);

/// Tangent estimation on the full cloud at each subsample point, gradient
/// evaluation, normalization and projection.
DesignBundle build_design(const PointCloud& cloud, const GradientProvider& dict, const RunConfig& cfg);

RunResult run(const PointCloud& cloud, const GradientProvider& dict, const RunConfig& cfg);

/// omega runs with seeds seed + r. Failures land in the "FAILED" bucket.
ReplicateSummary replicate(const PointCloud& cloud, const GradientProvider& dict, const RunConfig& cfg);

std::string support_key(const std::vector<Index>& support, const std::vector<std::string>& names);

nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const RunResult& result, const std::vector<std::string>& names);
nlohmann::json to_json(const ReplicateSummary& summary);

}  // namespace tslasso
