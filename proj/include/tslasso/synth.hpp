#pragma once

#include "tslasso/molecule.hpp"
#include "tslasso/random.hpp"

#include <cstdint>
#include <numbers>
#include <optional>

namespace tslasso {

struct SwissRollSpec {
  Index n = 2000;
  Index ambient_dim = 49;
  std::uint64_t seed = 0;
  double t_min = 1.5 * std::numbers::pi;
  double t_max = 4.5 * std::numbers::pi;
  double h_min = 0.0;
  double h_max = 20.0;
  /// Replaces the random rotation when set (ambient_dim x ambient_dim).
  std::optional<Eigen::MatrixXd> rotation;

  void validate() const;
};

struct SwissRollData {
  PointCloud cloud;
  Eigen::MatrixXd truth;     // n x 2: (t, h)
  Eigen::MatrixXd rotation;  // Q
  Dictionary dictionary;     // g1, g2, x0 .. x{D-1}
};

/// Random orthogonal matrix: QR of a Gaussian matrix with R's diagonal made
/// positive.
Eigen::MatrixXd random_rotation(Index dim, Rng& rng);

SwissRollData swiss_roll(const SwissRollSpec& spec, unsigned threads = 1);

enum class TorsionGrid { kUniformGrid, kUniformRandom };
enum class NoiseSpace { kAtoms, kFeatures };

TorsionGrid parse_torsion_grid(const std::string& s);
std::string to_string(TorsionGrid g);
NoiseSpace parse_noise_space(const std::string& s);
std::string to_string(NoiseSpace s);

struct RigidEthanolSpec {
  Index n = 2000;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  TorsionGrid grid = TorsionGrid::kUniformRandom;
  NoiseSpace noise_space = NoiseSpace::kAtoms;
  bool freeze_g2 = false;
  double frozen_g2 = std::numbers::pi;
  Index feature_dim = 50;

  void validate() const;
};

struct RigidEthanolData {
  std::vector<MolecularConfig> configs;  // after atom-space noise
  PointCloud cloud;                      // n x feature_dim
  Eigen::MatrixXd truth;                 // n x 2: (g1, g2) in (-pi, pi]
  FeaturizationMap featurization;
  BondDiagram diagram;
  Dictionary dictionary;                 // 12 bond torsions
};

/// Nine-atom ethanol: C0 C1 O2, methyl H3-H5 on C0, H6 H7 on C1, hydroxyl H8.
BondDiagram ethanol_diagram();

/// Noise-free skeleton with methyl torsion H3-C0-C1-O2 = g1 and hydroxyl
/// torsion C0-C1-O2-H8 = g2.
MolecularConfig ethanol_config(double g1, double g2);

/// The two reference torsions whose values are stored as ground truth.
inline constexpr Quadruple kEthanolMethylTorsion{3, 0, 1, 2};
inline constexpr Quadruple kEthanolHydroxylTorsion{0, 1, 2, 8};

RigidEthanolData rigid_ethanol(const RigidEthanolSpec& spec, unsigned threads = 1);

/// Wraps to (-pi, pi].
double wrap_angle(double a);

}  // namespace tslasso
