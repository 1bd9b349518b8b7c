#pragma once

#include "tslasso/pointcloud.hpp"

#include <Eigen/Core>

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace tslasso {

/// A differentiable scalar function with an analytic gradient in its input
/// space.
class DictFunction {
 public:
  explicit DictFunction(std::string name) : name_(std::move(name)) {}
  virtual ~DictFunction() = default;

  const std::string& name() const { return name_; }
  /// Required input dimension.
  virtual Index input_dim() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;

 private:
  std::string name_;
};

using DictFunctionPtr = std::shared_ptr<const DictFunction>;

/// x -> x_j.
class CoordinateFunction final : public DictFunction {
 public:
  CoordinateFunction(std::string name, Index index, Index dim);
  Index input_dim() const override { return dim_; }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  Index index() const { return index_; }

 private:
  Index index_;
  Index dim_;
};

/// x -> <w, x> + offset.
class LinearFunction final : public DictFunction {
 public:
  LinearFunction(std::string name, Eigen::VectorXd weights, double offset = 0.0);
  Index input_dim() const override { return weights_.size(); }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd&) const override { return weights_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double offset() const { return offset_; }

 private:
  Eigen::VectorXd weights_;
  double offset_;
};

/// Roll parameter of a Swiss roll (t cos t, h, t sin t) living in the first
/// three coordinates of y = Q^T x. The polar angle of (y_0, y_2) is lifted to
/// the sheet whose radius is closest, so on the surface the value is t itself;
/// the gradient is that of the locally continuous angle branch.
class SwissRollAngle final : public DictFunction {
 public:
  SwissRollAngle(std::string name, Eigen::MatrixXd rotation);
  Index input_dim() const override { return rotation_.rows(); }
  double value(const Eigen::VectorXd& x) const override;
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
  const Eigen::MatrixXd& rotation() const { return rotation_; }

 private:
  Eigen::MatrixXd rotation_;
};

/// Ordered list of functions with unique names, all on the same input space.
class Dictionary {
 public:
  Dictionary() = default;
  explicit Dictionary(std::vector<DictFunctionPtr> functions);

  Index p() const { return static_cast<Index>(functions_.size()); }
  const DictFunction& operator[](Index j) const { return *functions_[static_cast<std::size_t>(j)]; }
  const std::vector<DictFunctionPtr>& functions() const { return functions_; }
  std::vector<std::string> names() const;
  Index input_dim() const { return functions_.front()->input_dim(); }

 private:
  std::vector<DictFunctionPtr> functions_;
};

DictFunctionPtr coordinate_function(Index j, Index dim);

/// (g1, g2): roll parameter t and height h, as functions on R^D given the
/// embedding rotation Q (D x D, D >= 3). Throws ConfigError for a missing or
/// malformed rotation.
std::pair<DictFunctionPtr, DictFunctionPtr> swissroll_intrinsics(const Eigen::MatrixXd& rotation);

/// Anything that can produce ambient gradients of a dictionary at the points
/// of a cloud. Implementations are immutable and thread-safe.
class GradientProvider {
 public:
  virtual ~GradientProvider() = default;
  virtual Index p() const = 0;
  virtual std::vector<std::string> names() const = 0;
  /// D x p matrix whose column j is grad f_j at point i of `cloud`.
  virtual Eigen::MatrixXd gradients(const PointCloud& cloud, Index i) const = 0;
};

/// Evaluates functions defined directly on the ambient space.
class AmbientGradients final : public GradientProvider {
 public:
  explicit AmbientGradients(Dictionary dict) : dict_(std::move(dict)) {}
  Index p() const override { return dict_.p(); }
  std::vector<std::string> names() const override { return dict_.names(); }
  Eigen::MatrixXd gradients(const PointCloud& cloud, Index i) const override;
  const Dictionary& dictionary() const { return dict_; }

 private:
  Dictionary dict_;
};

struct GradientCheck {
  std::string name;
  double max_relative_error = 0.0;
  Index points_checked = 0;
  Index points_skipped = 0;  // gradient norm below the floor
};

/// Central differences with step h per coordinate. Points where ||grad|| is
/// below `norm_floor` are skipped. The realized step (x+h)-(x-h) is used as
/// the denominator so linear functions are checked exactly.
GradientCheck check_gradient(const DictFunction& fn, const Eigen::MatrixXd& sample_points, double h = 1e-5,
                             double norm_floor = 1e-3);

}  // namespace tslasso
