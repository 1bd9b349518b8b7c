#pragma once

#include "tslasso/dictionary.hpp"

#include <Eigen/Core>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace tslasso {

using Positions = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

struct MolecularConfig {
  Positions positions;  // N_a x 3
  std::vector<std::string> atom_labels;

  Index atom_count() const { return positions.rows(); }
  /// (x0, y0, z0, x1, ...), length 3 N_a.
  Eigen::VectorXd flat() const;
  static MolecularConfig from_flat(const Eigen::VectorXd& flat, std::vector<std::string> labels = {});
};

using Quadruple = std::array<Index, 4>;

/// Dihedral angle in (-pi, pi] between planes (a,b,c) and (b,c,d), IUPAC sign
/// (right-handed about b->c). Throws GeometryError for collinear triples.
double dihedral_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                      const Eigen::Vector3d& d);

/// Gradient of dihedral_angle w.r.t. (a, b, c, d), one row per atom.
Eigen::Matrix<double, 4, 3> dihedral_gradient(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                              const Eigen::Vector3d& c, const Eigen::Vector3d& d);

/// Torsion of four atoms as a function of the flattened configuration.
class TorsionFunction final : public DictFunction {
 public:
  TorsionFunction(std::string name, Quadruple atoms, Index atom_count);
  Index input_dim() const override { return 3 * atom_count_; }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  const Quadruple& atoms() const { return atoms_; }

 private:
  Quadruple atoms_;
  Index atom_count_;
};

DictFunctionPtr torsion(const Quadruple& quadruple, Index atom_count, std::string name = {});

/// 3 * C(n, 3).
Index planar_angle_count(Index atom_count);

/// Interior angles of every triangle i < j < k (lexicographic), emitted in
/// vertex order i, j, k. Throws GeometryError on coincident atoms.
Eigen::VectorXd featurize_planar_angles(const MolecularConfig& config);

/// Analytic Jacobian of featurize_planar_angles, (3 C(n,3)) x (3 n). Rows for
/// angles at exactly collinear triples are left zero.
Eigen::MatrixXd planar_angle_jacobian(const MolecularConfig& config);

/// Mean-centering followed by projection onto the top right singular vectors.
struct FeaturizationMap {
  Eigen::MatrixXd projection;  // F x D, orthonormal columns
  Eigen::VectorXd mean;        // F
  Eigen::VectorXd singular_values;  // all singular values of the centered feature matrix

  Index dim() const { return projection.cols(); }
  Eigen::VectorXd apply_features(const Eigen::VectorXd& features) const;
  Eigen::VectorXd apply(const MolecularConfig& config) const;
};

/// Fits the projection on a features matrix (one row per sample). Throws
/// RankDeficient when D exceeds the sample count or the centered rank.
FeaturizationMap fit_projection(const Eigen::MatrixXd& features, Index D);
FeaturizationMap fit_featurization(const std::vector<MolecularConfig>& configs, Index D);

/// Least-squares pushforward of configuration-space gradients into the
/// feature chart at one configuration: grad_xi f = V^T (J^+)^T grad_x f.
class Pushforward {
 public:
  Pushforward(const MolecularConfig& config, const FeaturizationMap& fmap);
  Eigen::VectorXd apply(const Eigen::VectorXd& config_gradient) const;

 private:
  Eigen::MatrixXd left_;   // V^T U_r S_r^{-1}, D x r
  Eigen::MatrixXd right_;  // W_r, 3N x r
};

Eigen::VectorXd pushforward_gradient(const DictFunction& fn, const MolecularConfig& config,
                                     const FeaturizationMap& fmap);

struct BondDiagram {
  std::vector<std::string> atoms;
  std::vector<std::array<Index, 2>> bonds;

  std::vector<std::vector<Index>> adjacency() const;
  bool is_heavy(Index atom) const { return atoms.at(static_cast<std::size_t>(atom)) != "H"; }
};

BondDiagram load_bond_diagram(const std::filesystem::path& path);
void save_bond_diagram(const std::filesystem::path& path, const BondDiagram& diagram);

/// All (x, b1, b2, y) with (b1, b2) a heavy-atom bond where both ends carry
/// other neighbors, x a neighbor of b1 and y a neighbor of b2. Bonds are taken
/// in file order, neighbors ascending.
std::vector<Quadruple> bond_torsions(const BondDiagram& diagram);

/// Torsion dictionary named like "H3-C0-C1-O2".
Dictionary torsion_dictionary(const BondDiagram& diagram);

/// Index of the central bond of each torsion in `torsions`, i.e. the colinear
/// group the torsion belongs to.
std::vector<Index> torsion_groups(const std::vector<Quadruple>& torsions);

/// Gradients of a configuration-space dictionary pushed into the feature chart.
/// Point i of the cloud is paired with configs[i].
class PushforwardGradients final : public GradientProvider {
 public:
  PushforwardGradients(Dictionary dict, std::vector<MolecularConfig> configs, FeaturizationMap fmap);
  Index p() const override { return dict_.p(); }
  std::vector<std::string> names() const override { return dict_.names(); }
  Eigen::MatrixXd gradients(const PointCloud& cloud, Index i) const override;

  const Dictionary& dictionary() const { return dict_; }
  const std::vector<MolecularConfig>& configs() const { return configs_; }
  const FeaturizationMap& featurization() const { return fmap_; }

 private:
  Dictionary dict_;
  std::vector<MolecularConfig> configs_;
  FeaturizationMap fmap_;
};

/// Configs as an n x 3N_a raw matrix; labels travel in the bond diagram.
void write_configs(const std::filesystem::path& path, const std::vector<MolecularConfig>& configs);
std::vector<MolecularConfig> read_configs(const std::filesystem::path& path,
                                          const std::vector<std::string>& labels);

/// Projection V and mean stored as one raw matrix: F x (D + 1), mean in the
/// last column.
void write_featurization(const std::filesystem::path& path, const FeaturizationMap& fmap);
FeaturizationMap read_featurization(const std::filesystem::path& path);

}  // namespace tslasso
