#include "tslasso/dictionary.hpp"

#include "tslasso/errors.hpp"

#include <cmath>
#include <numbers>
#include <set>

namespace tslasso {

CoordinateFunction::CoordinateFunction(std::string name, Index index, Index dim)
    : DictFunction(std::move(name)), index_(index), dim_(dim) {
  if (index < 0 || index >= dim) {
    throw IndexError("coordinate index " + std::to_string(index) + " out of range [0, " + std::to_string(dim) + ")");
  }
}

double CoordinateFunction::value(const Eigen::VectorXd& x) const { return x(index_); }

Eigen::VectorXd CoordinateFunction::gradient(const Eigen::VectorXd&) const {
  return Eigen::VectorXd::Unit(dim_, index_);
}

LinearFunction::LinearFunction(std::string name, Eigen::VectorXd weights, double offset)
    : DictFunction(std::move(name)), weights_(std::move(weights)), offset_(offset) {
  if (weights_.size() == 0) throw ConfigError("linear function needs at least one weight");
}

double LinearFunction::value(const Eigen::VectorXd& x) const { return weights_.dot(x) + offset_; }

SwissRollAngle::SwissRollAngle(std::string name, Eigen::MatrixXd rotation)
    : DictFunction(std::move(name)), rotation_(std::move(rotation)) {
  if (rotation_.rows() < 3 || rotation_.rows() != rotation_.cols()) {
    throw ConfigError("swiss roll rotation must be square with dimension >= 3");
  }
}

double SwissRollAngle::value(const Eigen::VectorXd& x) const {
  const double a = rotation_.col(0).dot(x);
  const double c = rotation_.col(2).dot(x);
  const double radius = std::hypot(a, c);
  const double principal = std::atan2(c, a);
  const double turns = std::round((radius - principal) / (2.0 * std::numbers::pi));
  return principal + 2.0 * std::numbers::pi * turns;
}

Eigen::VectorXd SwissRollAngle::gradient(const Eigen::VectorXd& x) const {
  const double a = rotation_.col(0).dot(x);
  const double c = rotation_.col(2).dot(x);
  const double r2 = a * a + c * c;
  if (r2 == 0.0) throw GeometryError("swiss roll angle undefined on the roll axis");
  // d atan2(c, a) = (a dc - c da) / (a^2 + c^2)
  return (a * rotation_.col(2) - c * rotation_.col(0)) / r2;
}

Dictionary::Dictionary(std::vector<DictFunctionPtr> functions) : functions_(std::move(functions)) {
  if (functions_.empty()) throw ConfigError("dictionary must contain at least one function");
  std::set<std::string> seen;
  const Index dim = functions_.front()->input_dim();
  for (const auto& f : functions_) {
    if (!f) throw ConfigError("null dictionary function");
    if (!seen.insert(f->name()).second) throw ConfigError("duplicate dictionary function name '" + f->name() + "'");
    if (f->input_dim() != dim) {
      throw ConfigError("dictionary function '" + f->name() + "' has input dimension " +
                        std::to_string(f->input_dim()) + ", expected " + std::to_string(dim));
    }
  }
}

std::vector<std::string> Dictionary::names() const {
  std::vector<std::string> out;
  out.reserve(functions_.size());
  for (const auto& f : functions_) out.push_back(f->name());
  return out;
}

DictFunctionPtr coordinate_function(Index j, Index dim) {
  return std::make_shared<CoordinateFunction>("x" + std::to_string(j), j, dim);
}

std::pair<DictFunctionPtr, DictFunctionPtr> swissroll_intrinsics(const Eigen::MatrixXd& rotation) {
  if (rotation.size() == 0) throw ConfigError("swiss roll intrinsics need the generator rotation");
  auto g1 = std::make_shared<SwissRollAngle>("g1", rotation);
  auto g2 = std::make_shared<LinearFunction>("g2", rotation.col(1));
  return {std::move(g1), std::move(g2)};
}

Eigen::MatrixXd AmbientGradients::gradients(const PointCloud& cloud, Index i) const {
  const Eigen::VectorXd x = cloud.point(i);
  if (dict_.input_dim() != cloud.dim()) {
    throw ShapeError("dictionary input dimension " + std::to_string(dict_.input_dim()) +
                     " does not match cloud dimension " + std::to_string(cloud.dim()));
  }
  Eigen::MatrixXd g(cloud.dim(), dict_.p());
  for (Index j = 0; j < dict_.p(); ++j) g.col(j) = dict_[j].gradient(x);
  return g;
}

GradientCheck check_gradient(const DictFunction& fn, const Eigen::MatrixXd& sample_points, double h,
                             double norm_floor) {
  GradientCheck out;
  out.name = fn.name();
  for (Index r = 0; r < sample_points.rows(); ++r) {
    Eigen::VectorXd x = sample_points.row(r).transpose();
    const Eigen::VectorXd analytic = fn.gradient(x);
    const double norm = analytic.norm();
    if (norm < norm_floor) {
      ++out.points_skipped;
      continue;
    }
    Eigen::VectorXd numeric(x.size());
    for (Index k = 0; k < x.size(); ++k) {
      const double orig = x(k);
      volatile double plus = orig + h;
      volatile double minus = orig - h;
      x(k) = plus;
      const double fp = fn.value(x);
      x(k) = minus;
      const double fm = fn.value(x);
      x(k) = orig;
      numeric(k) = (fp - fm) / (plus - minus);
    }
    out.max_relative_error = std::max(out.max_relative_error, (numeric - analytic).norm() / norm);
    ++out.points_checked;
  }
  return out;
}

}  // namespace tslasso
