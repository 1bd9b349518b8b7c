#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tslasso {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IOError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DegenerateWeights : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class ZeroGradientFunction : public Error {
 public:
  ZeroGradientFunction(const std::string& what, std::size_t index)
      : Error(what), function_index(index) {}
  std::size_t function_index;
};

/// Raised when a matrix that must have rank >= d does not. `points` lists the
/// offending sample indices when the failure is per point.
class RankDeficient : public Error {
 public:
  explicit RankDeficient(const std::string& what, std::vector<std::size_t> pts = {})
      : Error(what), points(std::move(pts)) {}
  std::vector<std::size_t> points;
};

/// Wraps a lower-level failure with the pipeline stage it occurred in.
class StageError : public Error {
 public:
  StageError(std::string stage_name, const std::string& what)
      : Error(stage_name + ": " + what), stage(std::move(stage_name)) {}
  std::string stage;
};

}  // namespace tslasso
