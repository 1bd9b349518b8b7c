#include "tslasso/synth.hpp"

#include "tslasso/errors.hpp"
#include "tslasso/parallel.hpp"

#include <Eigen/Geometry>
#include <Eigen/QR>

#include <cmath>

namespace tslasso {

namespace {

constexpr double kPi = std::numbers::pi;
// Streams above this offset are reserved for non-per-point draws.
constexpr std::uint64_t kGlobalStream = 1ULL << 62;

}  // namespace

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

void SwissRollSpec::validate() const {
  if (n < 1) throw ConfigError("swiss roll: n must be positive");
  if (ambient_dim < 3) throw ConfigError("swiss roll: ambient_dim must be at least 3");
  if (!(t_max > t_min) || !(h_max > h_min)) throw ConfigError("swiss roll: empty parameter range");
  if (rotation && (rotation->rows() != ambient_dim || rotation->cols() != ambient_dim)) {
    throw ConfigError("swiss roll: rotation override must be ambient_dim x ambient_dim");
  }
}

Eigen::MatrixXd random_rotation(Index dim, Rng& rng) {
  Eigen::MatrixXd g(dim, dim);
  for (Index c = 0; c < dim; ++c)
    for (Index r = 0; r < dim; ++r) g(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index c = 0; c < dim; ++c)
    if (r(c, c) < 0.0) q.col(c) = -q.col(c);
  return q;
}

SwissRollData swiss_roll(const SwissRollSpec& spec, unsigned threads) {
  spec.validate();
  const Index n = spec.n;
  const Index D = spec.ambient_dim;
  Eigen::MatrixXd q;
  if (spec.rotation) {
    q = *spec.rotation;
  } else {
    Rng rng = Rng::stream(spec.seed, kGlobalStream);
    q = random_rotation(D, rng);
  }

  Eigen::MatrixXd points(n, D);
  Eigen::MatrixXd truth(n, 2);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t idx) {
    const auto i = static_cast<Index>(idx);
    Rng rng = Rng::stream(spec.seed, idx);
    const double t = rng.uniform(spec.t_min, spec.t_max);
    const double h = rng.uniform(spec.h_min, spec.h_max);
    truth(i, 0) = t;
    truth(i, 1) = h;
    points.row(i) = (q.col(0) * (t * std::cos(t)) + q.col(1) * h + q.col(2) * (t * std::sin(t))).transpose();
  });

  auto [g1, g2] = swissroll_intrinsics(q);
  std::vector<DictFunctionPtr> fns{g1, g2};
  for (Index j = 0; j < D; ++j) fns.push_back(coordinate_function(j, D));
  return {PointCloud(std::move(points)), std::move(truth), std::move(q), Dictionary(std::move(fns))};
}

TorsionGrid parse_torsion_grid(const std::string& s) {
  if (s == "uniform-grid") return TorsionGrid::kUniformGrid;
  if (s == "uniform-random") return TorsionGrid::kUniformRandom;
  throw ConfigError("unknown torsion grid '" + s + "' (expected uniform-grid or uniform-random)");
}

std::string to_string(TorsionGrid g) {
  return g == TorsionGrid::kUniformGrid ? "uniform-grid" : "uniform-random";
}

NoiseSpace parse_noise_space(const std::string& s) {
  if (s == "atoms") return NoiseSpace::kAtoms;
  if (s == "features") return NoiseSpace::kFeatures;
  throw ConfigError("unknown noise space '" + s + "' (expected atoms or features)");
}

std::string to_string(NoiseSpace s) { return s == NoiseSpace::kAtoms ? "atoms" : "features"; }

void RigidEthanolSpec::validate() const {
  if (n < 1) throw ConfigError("ethanol: n must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ConfigError("ethanol: sigma must be finite and >= 0");
  if (feature_dim < 1) throw ConfigError("ethanol: feature_dim must be positive");
  if (feature_dim > n) throw ConfigError("ethanol: feature_dim exceeds n");
}

BondDiagram ethanol_diagram() {
  BondDiagram g;
  g.atoms = {"C", "C", "O", "H", "H", "H", "H", "H", "H"};
  g.bonds = {{0, 1}, {1, 2}, {0, 3}, {0, 4}, {0, 5}, {1, 6}, {1, 7}, {2, 8}};
  return g;
}

namespace {

constexpr double kCC = 1.54;
constexpr double kCO = 1.43;
constexpr double kCH = 1.09;
constexpr double kOH = 0.96;
const double kTetra = std::acos(-1.0 / 3.0);

// Places d bonded to c with |cd| = len, angle(b, c, d) = angle and
// dihedral(a, b, c, d) = torsion.
Eigen::Vector3d place(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c, double len,
                      double angle, double torsion) {
  const Eigen::Vector3d bc = (c - b).normalized();
  const Eigen::Vector3d nrm = (b - a).cross(bc).normalized();
  Eigen::Matrix3d m;
  m.col(0) = bc;
  m.col(1) = nrm.cross(bc);
  m.col(2) = nrm;
  const Eigen::Vector3d local(-len * std::cos(angle), len * std::sin(angle) * std::cos(torsion),
                              len * std::sin(angle) * std::sin(torsion));
  return c + m * local;
}

}  // namespace

MolecularConfig ethanol_config(double g1, double g2) {
  MolecularConfig cfg;
  cfg.atom_labels = {"C", "C", "O", "H", "H", "H", "H", "H", "H"};
  cfg.positions.resize(9, 3);
  const Eigen::Vector3d c0(0.0, 0.0, 0.0);
  const Eigen::Vector3d c1(kCC, 0.0, 0.0);
  const Eigen::Vector3d o2 = c1 + kCO * Eigen::Vector3d(-std::cos(kTetra), std::sin(kTetra), 0.0);
  cfg.positions.row(0) = c0.transpose();
  cfg.positions.row(1) = c1.transpose();
  cfg.positions.row(2) = o2.transpose();
  for (int k = 0; k < 3; ++k) {
    cfg.positions.row(3 + k) = place(o2, c1, c0, kCH, kTetra, g1 + 2.0 * kPi * k / 3.0).transpose();
  }
  cfg.positions.row(6) = place(o2, c0, c1, kCH, kTetra, 2.0 * kPi / 3.0).transpose();
  cfg.positions.row(7) = place(o2, c0, c1, kCH, kTetra, -2.0 * kPi / 3.0).transpose();
  cfg.positions.row(8) = place(c0, c1, o2, kOH, kTetra, g2).transpose();
  return cfg;
}

namespace {

// No real bond is shorter than ~0.74 A; closer than this the molecule has collapsed.
constexpr double kCollapseDistance = 0.5;

void check_not_collapsed(const MolecularConfig& c) {
  for (Index a = 0; a < c.atom_count(); ++a)
    for (Index b = a + 1; b < c.atom_count(); ++b) {
      const double dist = (c.positions.row(a) - c.positions.row(b)).norm();
      if (dist < kCollapseDistance)
        throw GeometryError("atoms " + std::to_string(a) + " and " + std::to_string(b) + " collapsed (distance " +
                            std::to_string(dist) + ")");
    }
}

}  // namespace

RigidEthanolData rigid_ethanol(const RigidEthanolSpec& spec, unsigned threads) {
  spec.validate();
  const Index n = spec.n;
  const auto un = static_cast<std::size_t>(n);

  // torsion pairs before noise
  std::vector<std::pair<double, double>> angles(un);
  if (spec.grid == TorsionGrid::kUniformGrid) {
    if (spec.freeze_g2) {
      for (std::size_t i = 0; i < un; ++i) angles[i] = {2.0 * kPi * static_cast<double>(i) / static_cast<double>(n), spec.frozen_g2};
    } else {
      const auto m1 = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
      const std::size_t m2 = (un + m1 - 1) / m1;
      for (std::size_t i = 0; i < un; ++i) {
        angles[i] = {2.0 * kPi * static_cast<double>(i % m1) / static_cast<double>(m1),
                     2.0 * kPi * static_cast<double>(i / m1) / static_cast<double>(m2)};
      }
    }
  }

  std::vector<MolecularConfig> configs(un);
  Eigen::MatrixXd features(n, planar_angle_count(9));
  Eigen::MatrixXd truth(n, 2);
  parallel_for(un, threads, [&](std::size_t i) {
    Rng rng = Rng::stream(spec.seed, i);
    if (spec.grid == TorsionGrid::kUniformRandom) {
      const double a = rng.uniform(0.0, 2.0 * kPi);
      const double b = spec.freeze_g2 ? spec.frozen_g2 : rng.uniform(0.0, 2.0 * kPi);
      angles[i] = {a, b};
    }
    const MolecularConfig clean = ethanol_config(angles[i].first, angles[i].second);
    const auto row = static_cast<Index>(i);
    truth(row, 0) = wrap_angle(angles[i].first);
    truth(row, 1) = wrap_angle(angles[i].second);

    if (spec.noise_space == NoiseSpace::kFeatures || spec.sigma == 0.0) {
      configs[i] = clean;
      Eigen::VectorXd f = featurize_planar_angles(clean);
      if (spec.noise_space == NoiseSpace::kFeatures)
        for (Index k = 0; k < f.size(); ++k) f(k) += spec.sigma * rng.normal();
      features.row(row) = f.transpose();
      return;
    }
    for (int attempt = 0;; ++attempt) {
      MolecularConfig noisy = clean;
      for (Index a = 0; a < 9; ++a)
        for (Index c = 0; c < 3; ++c) noisy.positions(a, c) += spec.sigma * rng.normal();
      try {
        check_not_collapsed(noisy);
        features.row(row) = featurize_planar_angles(noisy).transpose();
        // the pushforward needs torsions to be defined at the config too
        dihedral_angle(noisy.positions.row(3).transpose(), noisy.positions.row(0).transpose(),
                       noisy.positions.row(1).transpose(), noisy.positions.row(2).transpose());
        configs[i] = std::move(noisy);
        return;
      } catch (const GeometryError& e) {
        if (attempt >= 1) {
          throw GeometryError("ethanol point " + std::to_string(i) + " degenerate after resampling: " + e.what());
        }
      }
    }
  });

  FeaturizationMap fmap = fit_projection(features, spec.feature_dim);
  Eigen::MatrixXd cloud = (features.rowwise() - fmap.mean.transpose()) * fmap.projection;
  BondDiagram diagram = ethanol_diagram();
  Dictionary dict = torsion_dictionary(diagram);
  return {std::move(configs), PointCloud(std::move(cloud)), std::move(truth), std::move(fmap), std::move(diagram),
          std::move(dict)};
}

}  // namespace tslasso
