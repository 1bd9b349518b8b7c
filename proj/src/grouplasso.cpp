#include "tslasso/grouplasso.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>

namespace tslasso {

void ProjectedDesign::validate() const {
  if (blocks.empty()) throw ShapeError("projected design has no points");
  const Index rows = d();
  const Index cols = p();
  if (rows < 1 || cols < 1) throw ShapeError("projected design blocks must be non-empty");
  for (const auto& b : blocks) {
    if (b.rows() != rows || b.cols() != cols) throw ShapeError("projected design blocks differ in shape");
    if (!b.allFinite()) throw ShapeError("projected design contains non-finite entries");
  }
  if (gammas.size() != 0 && gammas.size() != cols) throw ShapeError("gamma count does not match p");
}

CoefficientField CoefficientField::zeros(Index n, Index p, Index d) {
  CoefficientField out;
  out.blocks.assign(static_cast<std::size_t>(n), Eigen::MatrixXd::Zero(p, d));
  return out;
}

double CoefficientField::group_norm(Index j) const {
  double s = 0.0;
  for (const auto& b : blocks) s += b.row(j).squaredNorm();
  return std::sqrt(s);
}

Eigen::VectorXd CoefficientField::group_norms() const {
  Eigen::VectorXd out(p());
  for (Index j = 0; j < p(); ++j) out(j) = group_norm(j);
  return out;
}

namespace {

void check_shapes(const CoefficientField& b, const ProjectedDesign& x) {
  if (b.n() != x.n()) throw ShapeError("coefficient field and design have different point counts");
  for (std::size_t i = 0; i < b.blocks.size(); ++i) {
    if (b.blocks[i].rows() != x.p() || b.blocks[i].cols() != x.d()) {
      throw ShapeError("coefficient block " + std::to_string(i) + " is not p x d");
    }
  }
}

double penalty_weight(const ProjectedDesign& x, double lambda) {
  return lambda / std::sqrt(static_cast<double>(x.d() * x.n()));
}

std::vector<Eigen::MatrixXd> residuals(const CoefficientField& b, const ProjectedDesign& x) {
  std::vector<Eigen::MatrixXd> r(x.blocks.size());
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(x.d(), x.d());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = eye - x.blocks[i] * b.blocks[i];
  return r;
}

double objective_from_residuals(const std::vector<Eigen::MatrixXd>& r, const CoefficientField& b, double mu) {
  double fit = 0.0;
  for (const auto& ri : r) fit += ri.squaredNorm();
  return 0.5 * fit + mu * b.group_norms().sum();
}

// Root t > 0 of sum_i s_i / (a_i t + mu)^2 = 1, written as h(t) - 1 = 0 with
// h = (sum_i s_i (a_i t + mu)^-2)^(-1/2). h is linear when a single term is
// present, so Newton converges in very few steps; bisection guards the rest.
double secular_root(const std::vector<double>& s, const std::vector<double>& a, double mu, double hi) {
  double lo = 0.0;
  double t = 0.0;
  for (int it = 0; it < 200; ++it) {
    double q = 0.0;
    double dq = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] == 0.0) continue;
      const double den = a[i] * t + mu;
      q += s[i] / (den * den);
      dq -= 2.0 * s[i] * a[i] / (den * den * den);
    }
    const double h = 1.0 / std::sqrt(q);
    const double f = h - 1.0;
    if (f < 0.0) {
      lo = t;
    } else {
      hi = t;
    }
    const double dh = -0.5 * dq / (q * std::sqrt(q));
    double next = dh > 0.0 ? t - f / dh : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(next)) || hi - lo <= 1e-16 * hi) return next;
    t = next;
  }
  return t;
}

}  // namespace

double objective(const CoefficientField& coefficients, const ProjectedDesign& design, double lambda) {
  design.validate();
  check_shapes(coefficients, design);
  return objective_from_residuals(residuals(coefficients, design), coefficients, penalty_weight(design, lambda));
}

KktResult kkt_check(const CoefficientField& coefficients, const ProjectedDesign& design, double lambda, double tol) {
  design.validate();
  check_shapes(coefficients, design);
  const double mu = penalty_weight(design, lambda);
  const auto r = residuals(coefficients, design);
  const Index n = design.n();
  const Index d = design.d();
  KktResult out;
  for (Index j = 0; j < design.p(); ++j) {
    Eigen::VectorXd g(n * d);
    Eigen::VectorXd beta(n * d);
    for (Index i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      g.segment(i * d, d) = r[ui].transpose() * design.blocks[ui].col(j);
      beta.segment(i * d, d) = coefficients.blocks[ui].row(j).transpose();
    }
    const double bn = beta.norm();
    const double violation = bn > 0.0 ? (g - mu * beta / bn).norm() : std::max(0.0, g.norm() - mu);
    out.max_residual = std::max(out.max_residual, violation);
  }
  out.pass = out.max_residual <= tol;
  return out;
}

double lambda_zero(const ProjectedDesign& design) {
  design.validate();
  double best = 0.0;
  for (Index j = 0; j < design.p(); ++j) {
    double s = 0.0;
    for (const auto& x : design.blocks) s += x.col(j).squaredNorm();
    best = std::max(best, std::sqrt(s));
  }
  return std::sqrt(static_cast<double>(design.d() * design.n())) * best;
}

SolveResult solve(const ProjectedDesign& design, double lambda, const SolverOptions& options,
                  const CoefficientField* warm_start) {
  design.validate();
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  if (!(options.tol > 0.0)) throw ConfigError("solver tolerance must be positive");
  const Index n = design.n();
  const Index p = design.p();
  const Index d = design.d();
  const double mu = penalty_weight(design, lambda);

  SolveResult result;
  CoefficientField& b = result.coefficients;
  if (warm_start != nullptr) {
    check_shapes(*warm_start, design);
    b = *warm_start;
  } else {
    b = CoefficientField::zeros(n, p, d);
  }
  b.lambda = lambda;
  std::vector<Eigen::MatrixXd> r = residuals(b, design);
  SolveReport& report = result.report;
  report.objective_trace.push_back(objective_from_residuals(r, b, mu));

  // per-group column energies a_i = ||X_i(:, j)||^2 never change
  std::vector<std::vector<double>> energy(static_cast<std::size_t>(p), std::vector<double>(static_cast<std::size_t>(n)));
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i)
      energy[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = design.blocks[static_cast<std::size_t>(i)].col(j).squaredNorm();

  std::vector<Eigen::VectorXd> c(static_cast<std::size_t>(n));
  std::vector<double> s(static_cast<std::size_t>(n));
  for (Index sweep = 1; sweep <= options.max_iter; ++sweep) {
    double max_update = 0.0;
    for (Index j = 0; j < p; ++j) {
      const auto& a = energy[static_cast<std::size_t>(j)];
      double c_norm2 = 0.0;
      double a_min = std::numeric_limits<double>::infinity();
      for (Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const auto x = design.blocks[ui].col(j);
        // gradient of the fit term with group j removed from the residual
        c[ui] = r[ui].transpose() * x + a[ui] * b.blocks[ui].row(j).transpose();
        s[ui] = c[ui].squaredNorm();
        c_norm2 += s[ui];
        if (s[ui] > 0.0) a_min = std::min(a_min, a[ui]);
      }
      const double c_norm = std::sqrt(c_norm2);

      double update2 = 0.0;
      auto assign = [&](Index i, const Eigen::VectorXd& fresh) {
        const auto ui = static_cast<std::size_t>(i);
        const Eigen::VectorXd delta = fresh - b.blocks[ui].row(j).transpose();
        const double dn = delta.squaredNorm();
        if (dn == 0.0) return;
        update2 += dn;
        r[ui].noalias() -= design.blocks[ui].col(j) * delta.transpose();
        b.blocks[ui].row(j) = fresh.transpose();
      };

      if (c_norm <= mu || c_norm2 == 0.0) {
        for (Index i = 0; i < n; ++i) assign(i, Eigen::VectorXd::Zero(d));
      } else if (mu == 0.0) {
        for (Index i = 0; i < n; ++i) {
          const auto ui = static_cast<std::size_t>(i);
          assign(i, a[ui] > 0.0 ? Eigen::VectorXd(c[ui] / a[ui]) : Eigen::VectorXd::Zero(d));
        }
      } else {
        const double t = secular_root(s, a, mu, c_norm / a_min);
        for (Index i = 0; i < n; ++i) {
          const auto ui = static_cast<std::size_t>(i);
          assign(i, s[ui] > 0.0 ? Eigen::VectorXd(c[ui] * (t / (a[ui] * t + mu))) : Eigen::VectorXd::Zero(d));
        }
      }
      max_update = std::max(max_update, std::sqrt(update2));
    }
    report.iterations = sweep;
    // fresh residuals keep the objective and certificate free of drift
    r = residuals(b, design);
    report.objective_trace.push_back(objective_from_residuals(r, b, mu));
    if (max_update < options.tol) {
      report.kkt_residual = kkt_check(b, design, lambda, options.tol).max_residual;
      if (report.kkt_residual <= options.tol) {
        report.converged = true;
        return result;
      }
    }
  }
  report.kkt_residual = kkt_check(b, design, lambda, options.tol).max_residual;
  throw NotConverged("group lasso did not converge in " + std::to_string(options.max_iter) +
                         " sweeps (KKT residual " + std::to_string(report.kkt_residual) + ")",
                     std::move(result));
}

std::vector<Index> support(const CoefficientField& coefficients, double zero_tol) {
  std::vector<Index> out;
  for (Index j = 0; j < coefficients.p(); ++j) {
    if (coefficients.group_norm(j) > zero_tol) out.push_back(j);
  }
  return out;
}

LambdaRule parse_lambda_rule(const std::string& name) {
  if (name == "binary-search") return LambdaRule::kBinarySearch;
  if (name == "last-surviving") return LambdaRule::kLastSurviving;
  throw ConfigError("unknown lambda rule '" + name + "' (expected binary-search or last-surviving)");
}

std::string to_string(LambdaRule rule) {
  return rule == LambdaRule::kBinarySearch ? "binary-search" : "last-surviving";
}

namespace {

PathPoint make_point(double lambda, const CoefficientField& b, double zero_tol) {
  PathPoint pt;
  pt.lambda = lambda;
  pt.group_norms = b.group_norms();
  pt.support = support(b, zero_tol);
  return pt;
}

void check_target(const ProjectedDesign& design, Index d_target) {
  if (d_target < 1 || d_target > design.p()) {
    throw ConfigError("target support size " + std::to_string(d_target) + " outside [1, " +
                      std::to_string(design.p()) + "]");
  }
}

}  // namespace

PathResult path_search(const ProjectedDesign& design, Index d_target, const PathOptions& options) {
  design.validate();
  check_target(design, d_target);
  PathResult out;
  out.lambda_zero = lambda_zero(design);
  CoefficientField current = CoefficientField::zeros(design.n(), design.p(), design.d());
  if (out.lambda_zero == 0.0) {
    out.unreachable = true;
    out.solution = current;
    return out;
  }

  double lo = 0.0;
  double hi = out.lambda_zero;
  bool found = false;
  double best_lambda = 0.0;
  CoefficientField best;
  // fallback: smallest support size >= d_target, then largest lambda
  Index fallback_size = std::numeric_limits<Index>::max();
  double fallback_lambda = 0.0;
  CoefficientField fallback;

  for (Index probe = 0; probe < options.max_probes; ++probe) {
    const double mid = 0.5 * (lo + hi);
    SolveResult res = solve(design, mid, options.solver, options.warm_start ? &current : nullptr);
    current = std::move(res.coefficients);
    out.path.push_back(make_point(mid, current, options.zero_tol));
    const auto size = static_cast<Index>(out.path.back().support.size());
    if (size == d_target) {
      if (!found || mid > best_lambda) {
        best_lambda = mid;
        best = current;
      }
      found = true;
      lo = mid;
    } else if (size > d_target) {
      if (size < fallback_size || (size == fallback_size && mid > fallback_lambda)) {
        fallback_size = size;
        fallback_lambda = mid;
        fallback = current;
      }
      lo = mid;
    } else {
      hi = mid;
    }
    if (found && hi - lo <= options.rel_tol * out.lambda_zero) break;
  }

  if (found) {
    out.lambda_star = best_lambda;
    out.solution = std::move(best);
  } else {
    out.unreachable = true;
    if (fallback_size != std::numeric_limits<Index>::max()) {
      out.lambda_star = fallback_lambda;
      out.solution = std::move(fallback);
    } else {
      out.lambda_star = out.path.empty() ? 0.0 : out.path.back().lambda;
      out.solution = current;
    }
  }
  out.support = support(out.solution, options.zero_tol);
  return out;
}

std::vector<PathPoint> regularization_path(const ProjectedDesign& design, const PathOptions& options) {
  design.validate();
  const double lam0 = lambda_zero(design);
  const Index grid = std::max<Index>(options.grid_size, 1);
  std::vector<PathPoint> path;
  CoefficientField current = CoefficientField::zeros(design.n(), design.p(), design.d());
  for (Index k = 0; k < grid; ++k) {
    const double lambda = lam0 * (1.0 - static_cast<double>(k) / static_cast<double>(grid));
    SolveResult res = solve(design, lambda, options.solver, options.warm_start ? &current : nullptr);
    current = std::move(res.coefficients);
    path.push_back(make_point(lambda, current, options.zero_tol));
  }
  return path;
}

PathResult last_surviving(const ProjectedDesign& design, Index d_target, const PathOptions& options) {
  design.validate();
  check_target(design, d_target);
  PathResult out;
  out.lambda_zero = lambda_zero(design);
  out.path = regularization_path(design, options);

  const Index p = design.p();
  // largest grid lambda at which each group is nonzero, with its norm there
  std::vector<double> exit_lambda(static_cast<std::size_t>(p), -1.0);
  std::vector<double> exit_norm(static_cast<std::size_t>(p), 0.0);
  for (const auto& pt : out.path) {
    for (Index j : pt.support) {
      const auto uj = static_cast<std::size_t>(j);
      if (pt.lambda > exit_lambda[uj]) {
        exit_lambda[uj] = pt.lambda;
        exit_norm[uj] = pt.group_norms(j);
      }
    }
  }
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index l, Index r) {
    const auto ul = static_cast<std::size_t>(l), ur = static_cast<std::size_t>(r);
    if (exit_lambda[ul] != exit_lambda[ur]) return exit_lambda[ul] > exit_lambda[ur];
    if (exit_norm[ul] != exit_norm[ur]) return exit_norm[ul] > exit_norm[ur];
    return l < r;
  });
  for (Index k = 0; k < d_target; ++k) {
    const Index j = order[static_cast<std::size_t>(k)];
    if (exit_lambda[static_cast<std::size_t>(j)] < 0.0) {
      out.unreachable = true;
      break;
    }
    out.support.push_back(j);
  }
  std::sort(out.support.begin(), out.support.end());
  const Index last = order[static_cast<std::size_t>(d_target - 1)];
  out.lambda_star = std::max(0.0, exit_lambda[static_cast<std::size_t>(last)]);
  out.solution = solve(design, out.lambda_star, options.solver).coefficients;
  return out;
}

PathResult select_support(const ProjectedDesign& design, Index d_target, LambdaRule rule, const PathOptions& options) {
  return rule == LambdaRule::kBinarySearch ? path_search(design, d_target, options)
                                           : last_surviving(design, d_target, options);
}

void write_path_csv(const std::filesystem::path& path, const std::vector<PathPoint>& points) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "lambda,group_index,group_norm\n";
  for (const auto& pt : points) {
    for (Index j = 0; j < pt.group_norms.size(); ++j) out << pt.lambda << ',' << j << ',' << pt.group_norms(j) << '\n';
  }
}

}  // namespace tslasso
