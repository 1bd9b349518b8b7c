#pragma once

#include "tslasso/config.hpp"
#include "tslasso/dictionary.hpp"
#include "tslasso/pipeline.hpp"

#include <iosfwd>

namespace tslasso {

/// Entry point of the tslasso executable. Returns the process exit code:
/// 0 success, 1 runtime failure, 2 usage or config error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Applies the [run] section of a config file on top of `cfg`. When the file
/// sets r_n but not epsilon_n, epsilon_n follows r_n.
void apply_run_section(const IniFile& ini, RunConfig& cfg);

struct GradientReport {
  std::vector<GradientCheck> checks;
  double threshold = 1e-4;
  bool pass() const;
};

GradientReport check_dictionary_gradients(const Dictionary& dict, const Eigen::MatrixXd& points, double h,
                                          double threshold);

}  // namespace tslasso
