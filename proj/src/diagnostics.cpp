#include "tslasso/diagnostics.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>

namespace tslasso {

Eigen::MatrixXd cosine_matrix(const ProjectedDesign& design) {
  design.validate();
  const Index p = design.p();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<bool> vanishes(static_cast<std::size_t>(p), false);
  for (const auto& x : design.blocks)
    for (Index j = 0; j < p; ++j)
      if (x.col(j).norm() == 0.0) vanishes[static_cast<std::size_t>(j)] = true;

  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(p, p);
  for (const auto& x : design.blocks) {
    const Eigen::RowVectorXd norms = x.colwise().norm();
    for (Index j = 0; j < p; ++j) {
      if (norms(j) == 0.0) continue;
      for (Index k = j; k < p; ++k) {
        if (norms(k) == 0.0) continue;
        const double c = std::abs(x.col(j).dot(x.col(k))) / (norms(j) * norms(k));
        acc(j, k) += std::min(c, 1.0);
      }
    }
  }
  acc /= static_cast<double>(design.n());
  for (Index j = 0; j < p; ++j) {
    for (Index k = j; k < p; ++k) {
      if (j == k) acc(j, k) = 1.0;
      else if (vanishes[static_cast<std::size_t>(j)] || vanishes[static_cast<std::size_t>(k)]) acc(j, k) = nan;
      acc(k, j) = acc(j, k);
    }
  }
  return acc;
}

DiagnosticsReport sampled_conditions(const ProjectedDesign& design, const std::vector<Index>& support_set,
                                     const Eigen::MatrixXd& gradient_norms, std::optional<double> lambda) {
  design.validate();
  const Index n = design.n();
  const Index p = design.p();
  const Index d = design.d();
  if (static_cast<Index>(support_set.size()) != d) {
    throw ConfigError("support has " + std::to_string(support_set.size()) + " functions, expected d = " +
                      std::to_string(d));
  }
  std::set<Index> in_s;
  for (Index j : support_set) {
    if (j < 0 || j >= p) throw IndexError("support index " + std::to_string(j) + " out of range");
    if (!in_s.insert(j).second) throw ConfigError("support indices must be distinct");
  }
  if (gradient_norms.rows() != n || gradient_norms.cols() != p) {
    throw ShapeError("gradient norm matrix must be n x p");
  }
  if (!(gradient_norms.array() > 0.0).all()) {
    throw ShapeError("gradient norms must be positive");
  }

  DiagnosticsReport rep;
  rep.support = support_set;
  rep.cosine_matrix = cosine_matrix(design);
  rep.delta = gradient_norms.minCoeff();
  rep.gamma_max = gradient_norms.maxCoeff();
  rep.complement_empty = p == d;
  rep.b_s = std::numeric_limits<double>::infinity();

  std::vector<std::size_t> bad_points;
  for (Index i = 0; i < n; ++i) {
    const auto& x = design.blocks[static_cast<std::size_t>(i)];
    Eigen::MatrixXd xs(d, d);
    Eigen::VectorXd g(d);
    for (Index c = 0; c < d; ++c) {
      xs.col(c) = x.col(support_set[static_cast<std::size_t>(c)]);
      g(c) = gradient_norms(i, support_set[static_cast<std::size_t>(c)]);
    }
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(xs).singularValues();
    if (!(sv(0) > 0.0) || sv(d - 1) < 1e-8 * sv(0)) {
      bad_points.push_back(static_cast<std::size_t>(design.point_ids.empty() ? i : design.point_ids[static_cast<std::size_t>(i)]));
      continue;
    }

    // renormalized columns X~ = X_S G^{-1}
    const Eigen::MatrixXd xt = xs * g.cwiseInverse().asDiagonal();
    const Eigen::MatrixXd gram_inv = (xt.transpose() * xt).inverse();
    const Eigen::MatrixXd dev = gram_inv - Eigen::MatrixXd(g.array().square().matrix().asDiagonal());
    const Eigen::MatrixXd sym = 0.5 * (dev + dev.transpose());
    const double nu_i = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .cwiseAbs()
                            .maxCoeff();
    rep.nu_s = std::max(rep.nu_s, nu_i);

    const Eigen::MatrixXd b_star = xs.inverse();
    rep.b_s = std::min(rep.b_s, b_star.rowwise().norm().minCoeff());
    rep.phi_s = std::max(rep.phi_s, g.maxCoeff());

    for (Index j : support_set) {
      for (Index k = 0; k < p; ++k) {
        if (in_s.count(k)) continue;
        const double v = std::abs(x.col(j).dot(x.col(k))) / (gradient_norms(i, j) * gradient_norms(i, k));
        rep.mu_s = std::max(rep.mu_s, v);
      }
    }
  }
  if (!bad_points.empty()) {
    throw RankDeficient("X_S is rank deficient at " + std::to_string(bad_points.size()) + " point(s)", bad_points);
  }

  const double amp = std::pow(1.0 + rep.nu_s / (rep.delta * rep.delta), 2);
  rep.incoherence_value = amp * rep.mu_s * rep.phi_s * rep.gamma_max * static_cast<double>(d);
  rep.incoherence_ok = rep.incoherence_value < 1.0;
  if (lambda) {
    rep.lambda = lambda;
    rep.lambda_lhs = *lambda * amp;
    rep.lambda_rhs = rep.b_s * std::sqrt(static_cast<double>(n)) / 2.0;
    rep.lambda_ok = rep.lambda_lhs < rep.lambda_rhs;
  }
  return rep;
}

nlohmann::json to_json(const DiagnosticsReport& r, const std::vector<std::string>& names) {
  nlohmann::json j;
  j["schema"] = 1;
  j["support"] = r.support;
  std::vector<std::string> support_names;
  for (Index s : r.support) support_names.push_back(names.at(static_cast<std::size_t>(s)));
  j["support_names"] = support_names;
  j["mu_s"] = r.mu_s;
  if (r.complement_empty) j["mu_s_note"] = "no functions outside S; empty maximum taken as 0";
  j["nu_s"] = r.nu_s;
  j["b_s"] = r.b_s;
  j["phi_s"] = r.phi_s;
  j["Gamma"] = r.gamma_max;
  j["delta"] = r.delta;
  j["incoherence_value"] = r.incoherence_value;
  j["incoherence_ok"] = r.incoherence_ok;
  if (r.lambda) {
    j["lambda"] = *r.lambda;
    j["lambda_lhs"] = r.lambda_lhs;
    j["lambda_rhs"] = r.lambda_rhs;
    j["lambda_ok"] = r.lambda_ok;
  }
  nlohmann::json cos = nlohmann::json::array();
  for (Index a = 0; a < r.cosine_matrix.rows(); ++a) {
    nlohmann::json row = nlohmann::json::array();
    for (Index b = 0; b < r.cosine_matrix.cols(); ++b) {
      const double v = r.cosine_matrix(a, b);
      row.push_back(std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v));
    }
    cos.push_back(std::move(row));
  }
  j["cosine_matrix"] = std::move(cos);
  j["names"] = names;
  return j;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path.string());
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  if (!header.empty()) out << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      if (std::isnan(m(r, c))) out << "nan";
      else out << m(r, c);
    }
    out << '\n';
  }
}

}  // namespace tslasso
