#include "tslasso/molecule.hpp"

#include "tslasso/errors.hpp"
#include "tslasso/tangent.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

namespace tslasso {

Eigen::VectorXd MolecularConfig::flat() const {
  return Eigen::Map<const Eigen::VectorXd>(positions.data(), positions.size());
}

MolecularConfig MolecularConfig::from_flat(const Eigen::VectorXd& flat, std::vector<std::string> labels) {
  if (flat.size() % 3 != 0) throw ShapeError("flattened configuration length must be a multiple of 3");
  MolecularConfig c;
  c.positions = Eigen::Map<const Positions>(flat.data(), flat.size() / 3, 3);
  c.atom_labels = std::move(labels);
  return c;
}

namespace {

constexpr double kCollinearTol = 1e-10;

Eigen::Vector3d atom(const Eigen::VectorXd& x, Index a) { return x.segment<3>(3 * a); }

}  // namespace

double dihedral_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                      const Eigen::Vector3d& d) {
  const Eigen::Vector3d b1 = b - a;
  const Eigen::Vector3d b2 = c - b;
  const Eigen::Vector3d b3 = d - c;
  const Eigen::Vector3d n1 = b1.cross(b2);
  const Eigen::Vector3d n2 = b2.cross(b3);
  if (n1.norm() < kCollinearTol || n2.norm() < kCollinearTol) {
    throw GeometryError("torsion undefined: collinear atom triple");
  }
  const double phi = std::atan2(b2.norm() * b1.dot(n2), n1.dot(n2));
  return phi <= -std::numbers::pi ? std::numbers::pi : phi;
}

Eigen::Matrix<double, 4, 3> dihedral_gradient(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                              const Eigen::Vector3d& c, const Eigen::Vector3d& d) {
  const Eigen::Vector3d f = a - b;
  const Eigen::Vector3d g = b - c;
  const Eigen::Vector3d h = d - c;
  const Eigen::Vector3d na = f.cross(g);
  const Eigen::Vector3d nb = h.cross(g);
  const double na2 = na.squaredNorm();
  const double nb2 = nb.squaredNorm();
  if (std::sqrt(na2) < kCollinearTol || std::sqrt(nb2) < kCollinearTol) {
    throw GeometryError("torsion gradient undefined: collinear atom triple");
  }
  const double gn = g.norm();
  const double fg = f.dot(g) / (na2 * gn);
  const double hg = h.dot(g) / (nb2 * gn);
  Eigen::Matrix<double, 4, 3> out;
  out.row(0) = -gn / na2 * na;
  out.row(1) = (gn / na2 + fg) * na - hg * nb;
  out.row(2) = hg * nb - fg * na - gn / nb2 * nb;
  out.row(3) = gn / nb2 * nb;
  return out;
}

TorsionFunction::TorsionFunction(std::string name, Quadruple atoms, Index atom_count)
    : DictFunction(std::move(name)), atoms_(atoms), atom_count_(atom_count) {
  std::set<Index> distinct(atoms.begin(), atoms.end());
  if (distinct.size() != 4) throw ConfigError("torsion atoms must be four distinct indices");
  for (Index a : atoms) {
    if (a < 0 || a >= atom_count) {
      throw IndexError("torsion atom " + std::to_string(a) + " out of range for " + std::to_string(atom_count) +
                       " atoms");
    }
  }
}

double TorsionFunction::value(const Eigen::VectorXd& x) const {
  return dihedral_angle(atom(x, atoms_[0]), atom(x, atoms_[1]), atom(x, atoms_[2]), atom(x, atoms_[3]));
}

Eigen::VectorXd TorsionFunction::gradient(const Eigen::VectorXd& x) const {
  const auto g = dihedral_gradient(atom(x, atoms_[0]), atom(x, atoms_[1]), atom(x, atoms_[2]), atom(x, atoms_[3]));
  Eigen::VectorXd out = Eigen::VectorXd::Zero(x.size());
  for (int k = 0; k < 4; ++k) out.segment<3>(3 * atoms_[static_cast<std::size_t>(k)]) += g.row(k).transpose();
  return out;
}

DictFunctionPtr torsion(const Quadruple& quadruple, Index atom_count, std::string name) {
  if (name.empty()) {
    name = "t" + std::to_string(quadruple[0]) + "_" + std::to_string(quadruple[1]) + "_" +
           std::to_string(quadruple[2]) + "_" + std::to_string(quadruple[3]);
  }
  return std::make_shared<TorsionFunction>(std::move(name), quadruple, atom_count);
}

Index planar_angle_count(Index atom_count) {
  return atom_count < 3 ? 0 : atom_count * (atom_count - 1) * (atom_count - 2) / 2;
}

namespace {

constexpr double kCoincidentTol = 1e-12;

double vertex_angle(const Eigen::Vector3d& u, const Eigen::Vector3d& w) {
  return std::atan2(u.cross(w).norm(), u.dot(w));
}

template <typename Fn>
void for_each_triple(Index n, Fn&& fn) {
  Index row = 0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      for (Index k = j + 1; k < n; ++k) {
        fn(i, j, k, row);
        row += 3;
      }
}

void check_distinct(const Eigen::Vector3d& u, Index a, Index b) {
  if (u.norm() < kCoincidentTol) {
    throw GeometryError("coincident atoms " + std::to_string(a) + " and " + std::to_string(b));
  }
}

}  // namespace

Eigen::VectorXd featurize_planar_angles(const MolecularConfig& config) {
  const Index n = config.atom_count();
  if (n < 3) throw GeometryError("planar angles need at least three atoms");
  const auto& p = config.positions;
  Eigen::VectorXd out(planar_angle_count(n));
  for_each_triple(n, [&](Index i, Index j, Index k, Index row) {
    const Eigen::Vector3d pi = p.row(i), pj = p.row(j), pk = p.row(k);
    check_distinct(pj - pi, i, j);
    check_distinct(pk - pi, i, k);
    check_distinct(pk - pj, j, k);
    out(row) = vertex_angle(pj - pi, pk - pi);
    out(row + 1) = vertex_angle(pi - pj, pk - pj);
    out(row + 2) = vertex_angle(pi - pk, pj - pk);
  });
  return out;
}

Eigen::MatrixXd planar_angle_jacobian(const MolecularConfig& config) {
  const Index n = config.atom_count();
  if (n < 3) throw GeometryError("planar angles need at least three atoms");
  const auto& p = config.positions;
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(planar_angle_count(n), 3 * n);

  // angle at `v` between arms to `a` and `b`
  auto fill = [&](Index row, Index v, Index a, Index b) {
    const Eigen::Vector3d u = p.row(a) - p.row(v);
    const Eigen::Vector3d w = p.row(b) - p.row(v);
    check_distinct(u, v, a);
    check_distinct(w, v, b);
    const Eigen::Vector3d cr = u.cross(w);
    const double crn = cr.norm();
    if (crn <= 1e-14 * u.norm() * w.norm()) return;
    const Eigen::Vector3d nrm = cr / crn;
    const Eigen::Vector3d du = -nrm.cross(u.normalized()) / u.norm();
    const Eigen::Vector3d dw = nrm.cross(w.normalized()) / w.norm();
    jac.block<1, 3>(row, 3 * a) += du.transpose();
    jac.block<1, 3>(row, 3 * b) += dw.transpose();
    jac.block<1, 3>(row, 3 * v) -= (du + dw).transpose();
  };
  for_each_triple(n, [&](Index i, Index j, Index k, Index row) {
    fill(row, i, j, k);
    fill(row + 1, j, i, k);
    fill(row + 2, k, i, j);
  });
  return jac;
}

Eigen::VectorXd FeaturizationMap::apply_features(const Eigen::VectorXd& features) const {
  if (features.size() != mean.size()) throw ShapeError("feature vector length does not match featurization");
  return projection.transpose() * (features - mean);
}

Eigen::VectorXd FeaturizationMap::apply(const MolecularConfig& config) const {
  return apply_features(featurize_planar_angles(config));
}

FeaturizationMap fit_projection(const Eigen::MatrixXd& features, Index D) {
  if (D < 1) throw ConfigError("target dimension must be >= 1");
  if (D > features.rows()) {
    throw RankDeficient("target dimension " + std::to_string(D) + " exceeds sample count " +
                        std::to_string(features.rows()));
  }
  if (D > features.cols()) {
    throw RankDeficient("target dimension " + std::to_string(D) + " exceeds feature dimension " +
                        std::to_string(features.cols()));
  }
  FeaturizationMap fmap;
  fmap.mean = features.colwise().mean().transpose();
  const Eigen::MatrixXd centered = features.rowwise() - fmap.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  fmap.singular_values = svd.singularValues();
  const double smax = fmap.singular_values.size() ? fmap.singular_values(0) : 0.0;
  if (!(smax > 0.0) || fmap.singular_values(D - 1) <= 1e-12 * smax) {
    throw RankDeficient("centered feature matrix has rank below " + std::to_string(D));
  }
  fmap.projection = svd.matrixV().leftCols(D);
  canonicalize_signs(fmap.projection);
  return fmap;
}

FeaturizationMap fit_featurization(const std::vector<MolecularConfig>& configs, Index D) {
  if (configs.empty()) throw RankDeficient("no configurations to featurize");
  const Index f = planar_angle_count(configs.front().atom_count());
  Eigen::MatrixXd features(static_cast<Index>(configs.size()), f);
  for (std::size_t r = 0; r < configs.size(); ++r) {
    features.row(static_cast<Index>(r)) = featurize_planar_angles(configs[r]).transpose();
  }
  return fit_projection(features, D);
}

Pushforward::Pushforward(const MolecularConfig& config, const FeaturizationMap& fmap) {
  const Eigen::MatrixXd jac = planar_angle_jacobian(config);
  if (jac.rows() != fmap.projection.rows()) throw ShapeError("featurization does not match configuration size");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  Index rank = 0;
  while (rank < s.size() && s(rank) > 1e-10 * s(0)) ++rank;
  if (rank == 0) throw GeometryError("planar angle Jacobian vanishes");
  left_ = fmap.projection.transpose() * svd.matrixU().leftCols(rank) *
          s.head(rank).cwiseInverse().asDiagonal();
  right_ = svd.matrixV().leftCols(rank);
}

Eigen::VectorXd Pushforward::apply(const Eigen::VectorXd& config_gradient) const {
  return left_ * (right_.transpose() * config_gradient);
}

Eigen::VectorXd pushforward_gradient(const DictFunction& fn, const MolecularConfig& config,
                                     const FeaturizationMap& fmap) {
  return Pushforward(config, fmap).apply(fn.gradient(config.flat()));
}

std::vector<std::vector<Index>> BondDiagram::adjacency() const {
  std::vector<std::vector<Index>> adj(atoms.size());
  for (const auto& [a, b] : bonds) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& v : adj) std::sort(v.begin(), v.end());
  return adj;
}

BondDiagram load_bond_diagram(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  BondDiagram diagram;
  try {
    diagram.atoms = j.at("atoms").get<std::vector<std::string>>();
    for (const auto& b : j.at("bonds")) {
      diagram.bonds.push_back({b.at(0).get<Index>(), b.at(1).get<Index>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  const auto n = static_cast<Index>(diagram.atoms.size());
  for (const auto& [a, b] : diagram.bonds) {
    if (a < 0 || b < 0 || a >= n || b >= n || a == b) {
      throw FormatError(path.string() + ": invalid bond (" + std::to_string(a) + ", " + std::to_string(b) + ")");
    }
  }
  return diagram;
}

void save_bond_diagram(const std::filesystem::path& path, const BondDiagram& diagram) {
  nlohmann::json j;
  j["schema"] = 1;
  j["atoms"] = diagram.atoms;
  j["bonds"] = nlohmann::json::array();
  for (const auto& [a, b] : diagram.bonds) j["bonds"].push_back({a, b});
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<Quadruple> bond_torsions(const BondDiagram& diagram) {
  const auto adj = diagram.adjacency();
  std::vector<Quadruple> out;
  for (const auto& [b1, b2] : diagram.bonds) {
    if (!diagram.is_heavy(b1) || !diagram.is_heavy(b2)) continue;
    for (Index x : adj[static_cast<std::size_t>(b1)]) {
      if (x == b2) continue;
      for (Index y : adj[static_cast<std::size_t>(b2)]) {
        if (y == b1 || y == x) continue;
        out.push_back({x, b1, b2, y});
      }
    }
  }
  return out;
}

Dictionary torsion_dictionary(const BondDiagram& diagram) {
  const auto n = static_cast<Index>(diagram.atoms.size());
  std::vector<DictFunctionPtr> fns;
  for (const auto& q : bond_torsions(diagram)) {
    std::string name;
    for (std::size_t k = 0; k < 4; ++k) {
      if (k) name += '-';
      name += diagram.atoms[static_cast<std::size_t>(q[k])] + std::to_string(q[k]);
    }
    fns.push_back(torsion(q, n, name));
  }
  if (fns.empty()) throw ConfigError("bond diagram defines no torsions");
  return Dictionary(std::move(fns));
}

std::vector<Index> torsion_groups(const std::vector<Quadruple>& torsions) {
  std::vector<std::pair<Index, Index>> bonds;
  std::vector<Index> out;
  for (const auto& q : torsions) {
    const std::pair<Index, Index> key{std::min(q[1], q[2]), std::max(q[1], q[2])};
    auto it = std::find(bonds.begin(), bonds.end(), key);
    if (it == bonds.end()) {
      bonds.push_back(key);
      out.push_back(static_cast<Index>(bonds.size() - 1));
    } else {
      out.push_back(static_cast<Index>(it - bonds.begin()));
    }
  }
  return out;
}

PushforwardGradients::PushforwardGradients(Dictionary dict, std::vector<MolecularConfig> configs,
                                           FeaturizationMap fmap)
    : dict_(std::move(dict)), configs_(std::move(configs)), fmap_(std::move(fmap)) {
  if (configs_.empty()) throw ConfigError("molecular dictionary needs configurations");
  if (dict_.input_dim() != 3 * configs_.front().atom_count()) {
    throw ShapeError("dictionary expects " + std::to_string(dict_.input_dim()) +
                     " configuration coordinates, configurations have " +
                     std::to_string(3 * configs_.front().atom_count()));
  }
}

Eigen::MatrixXd PushforwardGradients::gradients(const PointCloud& cloud, Index i) const {
  if (static_cast<std::size_t>(cloud.n()) != configs_.size()) {
    throw ShapeError("cloud has " + std::to_string(cloud.n()) + " points but " + std::to_string(configs_.size()) +
                     " configurations are paired with it");
  }
  if (cloud.dim() != fmap_.dim()) throw ShapeError("cloud dimension does not match featurization");
  const MolecularConfig& config = configs_[static_cast<std::size_t>(i)];
  const Pushforward push(config, fmap_);
  const Eigen::VectorXd x = config.flat();
  Eigen::MatrixXd g(fmap_.dim(), dict_.p());
  for (Index j = 0; j < dict_.p(); ++j) g.col(j) = push.apply(dict_[j].gradient(x));
  return g;
}

void write_configs(const std::filesystem::path& path, const std::vector<MolecularConfig>& configs) {
  if (configs.empty()) throw ConfigError("no configurations to write");
  Eigen::MatrixXd m(static_cast<Index>(configs.size()), 3 * configs.front().atom_count());
  for (std::size_t r = 0; r < configs.size(); ++r) m.row(static_cast<Index>(r)) = configs[r].flat().transpose();
  write_matrix(path, m, MatrixFormat::kRawF64);
}

std::vector<MolecularConfig> read_configs(const std::filesystem::path& path, const std::vector<std::string>& labels) {
  if (!std::filesystem::exists(path)) throw IOError("no such file: " + path.string());
  const Eigen::MatrixXd m = read_raw_f64(path);
  if (m.cols() % 3 != 0) throw FormatError(path.string() + ": configuration width is not a multiple of 3");
  if (!labels.empty() && static_cast<Index>(labels.size()) * 3 != m.cols()) {
    throw FormatError(path.string() + ": atom count does not match bond diagram");
  }
  if (!m.allFinite()) throw FormatError(path.string() + ": non-finite coordinates");
  std::vector<MolecularConfig> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Index r = 0; r < m.rows(); ++r) out.push_back(MolecularConfig::from_flat(m.row(r).transpose(), labels));
  return out;
}

void write_featurization(const std::filesystem::path& path, const FeaturizationMap& fmap) {
  Eigen::MatrixXd m(fmap.projection.rows(), fmap.projection.cols() + 1);
  m.leftCols(fmap.projection.cols()) = fmap.projection;
  m.col(fmap.projection.cols()) = fmap.mean;
  write_matrix(path, m, MatrixFormat::kRawF64);
}

FeaturizationMap read_featurization(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IOError("no such file: " + path.string());
  const Eigen::MatrixXd m = read_raw_f64(path);
  if (m.cols() < 2) throw FormatError(path.string() + ": featurization needs at least two columns");
  FeaturizationMap fmap;
  fmap.projection = m.leftCols(m.cols() - 1);
  fmap.mean = m.col(m.cols() - 1);
  return fmap;
}

}  // namespace tslasso
