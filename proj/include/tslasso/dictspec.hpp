#pragma once

#include "tslasso/molecule.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <optional>

namespace tslasso {

/// Dictionary description on disk (JSON, see docs/formats.md). Functions live
/// either on the ambient space of the point cloud or on molecular
/// configurations, in which case gradients are pushed forward through the
/// stored featurization.
struct DictionarySpec {
  enum class Input { kAmbient, kConfigurations };

  Input input = Input::kAmbient;
  Dictionary dictionary;
  // configuration dictionaries only
  std::vector<MolecularConfig> configs;
  std::optional<FeaturizationMap> featurization;
  std::optional<BondDiagram> diagram;
  /// files referenced by the spec, resolved to absolute-or-relative paths
  std::vector<std::filesystem::path> referenced_files;

  std::unique_ptr<GradientProvider> provider() const;
};

/// Relative file references are resolved against the spec file's directory.
/// Throws ConfigError on an unknown kind or missing field, IOError on missing
/// referenced files.
DictionarySpec load_dictionary_spec(const std::filesystem::path& path);

/// Entry builders for writing specs.
nlohmann::json coordinate_entry(const std::string& name, Index index, Index dim);
nlohmann::json linear_entry(const std::string& name, const Eigen::VectorXd& weights, double offset = 0.0);
nlohmann::json swissroll_angle_entry(const std::string& name, const std::string& rotation_file);
nlohmann::json torsion_entry(const std::string& name, const Quadruple& atoms);

}  // namespace tslasso
