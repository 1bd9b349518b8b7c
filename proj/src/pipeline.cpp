#include "tslasso/pipeline.hpp"

#include "tslasso/errors.hpp"
#include "tslasso/parallel.hpp"
#include "tslasso/random.hpp"

#include <Eigen/SVD>

#include <chrono>
#include <cmath>

namespace tslasso {

NormalizeOver parse_normalize_over(const std::string& name) {
  if (name == "subsample") return NormalizeOver::kSubsample;
  if (name == "all") return NormalizeOver::kAll;
  throw ConfigError("unknown normalize_over '" + name + "' (expected subsample or all)");
}

std::string to_string(NormalizeOver over) { return over == NormalizeOver::kSubsample ? "subsample" : "all"; }

void RunConfig::validate(Index n) const {
  if (d < 1) throw ConfigError("d must be >= 1");
  if (!(r_n > 0.0)) throw ConfigError("r_n must be positive");
  if (!(epsilon_n > 0.0)) throw ConfigError("epsilon_n must be positive");
  if (omega < 1) throw ConfigError("omega must be >= 1");
  if (subsample.empty()) {
    if (n_prime < 1 || n_prime > n) {
      throw ConfigError("n_prime must lie in [1, " + std::to_string(n) + "], got " + std::to_string(n_prime));
    }
  } else {
    for (Index i : subsample) {
      if (i < 0 || i >= n) throw ConfigError("subsample index " + std::to_string(i) + " out of range");
    }
  }
  if (!(path.solver.tol > 0.0)) throw ConfigError("solver tol must be positive");
  if (path.solver.max_iter < 1) throw ConfigError("solver max_iter must be >= 1");
}

Eigen::VectorXd gradient_scales(const std::vector<Eigen::MatrixXd>& gradients) {
  if (gradients.empty()) throw ShapeError("no gradients to normalize");
  const Index p = gradients.front().cols();
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(p);
  for (const auto& g : gradients) {
    if (g.cols() != p) throw ShapeError("gradient blocks differ in width");
    sq += g.colwise().squaredNorm().transpose();
  }
  Eigen::VectorXd gammas = (sq / static_cast<double>(gradients.size())).cwiseSqrt();
  for (Index j = 0; j < p; ++j) {
    if (!(gammas(j) > 0.0)) {
      throw ZeroGradientFunction("dictionary function " + std::to_string(j) + " has zero gradient on every sample",
                                 static_cast<std::size_t>(j));
    }
  }
  return gammas;
}

std::pair<std::vector<Eigen::MatrixXd>, Eigen::VectorXd> normalize(const std::vector<Eigen::MatrixXd>& gradients) {
  Eigen::VectorXd gammas = gradient_scales(gradients);
  std::vector<Eigen::MatrixXd> scaled;
  scaled.reserve(gradients.size());
  const Eigen::VectorXd inv = gammas.cwiseInverse();
  for (const auto& g : gradients) scaled.push_back(g * inv.asDiagonal());
  return {std::move(scaled), std::move(gammas)};
}

std::vector<Index> draw_subsample(Index n, Index n_prime, std::uint64_t seed) {
  Rng rng(seed);
  const auto picked = sample_without_replacement(static_cast<std::size_t>(n), static_cast<std::size_t>(n_prime), rng);
  return {picked.begin(), picked.end()};
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Re-raises library errors with the stage name prepended, keeping their type.
template <typename Fn>
auto in_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const RankDeficient& e) {
    throw RankDeficient(stage + ": " + e.what(), e.points);
  } catch (const NotConverged& e) {
    throw NotConverged(stage + ": " + e.what(), e.partial);
  } catch (const ZeroGradientFunction& e) {
    throw ZeroGradientFunction(stage + ": " + e.what(), e.function_index);
  } catch (const DegenerateWeights& e) {
    throw DegenerateWeights(stage + ": " + e.what());
  } catch (const GeometryError& e) {
    throw GeometryError(stage + ": " + e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace

DesignBundle build_design(const PointCloud& cloud, const GradientProvider& dict, const RunConfig& cfg) {
  cfg.validate(cloud.n());
  DesignBundle bundle;
  bundle.subsample = cfg.subsample.empty() ? draw_subsample(cloud.n(), cfg.n_prime, cfg.seed) : cfg.subsample;
  const auto m = bundle.subsample.size();
  const KernelSpec kernel{cfg.kernel, cfg.epsilon_n};

  auto t0 = Clock::now();
  bundle.frames.resize(m);
  in_stage("tangent estimation", [&] {
    parallel_for(m, cfg.threads, [&](std::size_t k) {
      const Index i = bundle.subsample[k];
      try {
        bundle.frames[k] = estimate_tangent(cloud, i, cfg.d, cfg.r_n, kernel);
      } catch (const RankDeficient& e) {
        throw RankDeficient("point " + std::to_string(i) + ": " + e.what(), {static_cast<std::size_t>(i)});
      }
    });
  });
  bundle.times.tangent_s = seconds_since(t0);

  t0 = Clock::now();
  std::vector<Eigen::MatrixXd> grads(m);
  in_stage("gradient evaluation", [&] {
    parallel_for(m, cfg.threads, [&](std::size_t k) { grads[k] = dict.gradients(cloud, bundle.subsample[k]); });
  });
  Eigen::VectorXd gammas;
  if (cfg.normalize_over == NormalizeOver::kAll) {
    std::vector<Eigen::MatrixXd> all(static_cast<std::size_t>(cloud.n()));
    in_stage("gradient evaluation", [&] {
      parallel_for(all.size(), cfg.threads, [&](std::size_t i) { all[i] = dict.gradients(cloud, static_cast<Index>(i)); });
    });
    gammas = in_stage("normalization", [&] { return gradient_scales(all); });
  } else {
    gammas = in_stage("normalization", [&] { return gradient_scales(grads); });
  }
  bundle.times.gradients_s = seconds_since(t0);

  t0 = Clock::now();
  const Eigen::VectorXd inv = gammas.cwiseInverse();
  bundle.design.gammas = gammas;
  bundle.design.point_ids = bundle.subsample;
  bundle.design.blocks.resize(m);
  bundle.ambient_norms.resize(static_cast<Index>(m), dict.p());
  for (std::size_t k = 0; k < m; ++k) {
    const Eigen::MatrixXd scaled = grads[k] * inv.asDiagonal();
    bundle.ambient_norms.row(static_cast<Index>(k)) = scaled.colwise().norm();
    bundle.design.blocks[k] = bundle.frames[k].basis.transpose() * scaled;
  }
  bundle.times.projection_s = seconds_since(t0);
  return bundle;
}

RunResult run(const PointCloud& cloud, const GradientProvider& dict, const RunConfig& cfg) {
  DesignBundle bundle = build_design(cloud, dict, cfg);
  const auto names = dict.names();

  const auto t0 = Clock::now();
  PathResult sel = in_stage("group lasso", [&] {
    return select_support(bundle.design, cfg.d, cfg.lambda_rule, cfg.path);
  });
  bundle.times.solve_s = seconds_since(t0);

  RunResult out;
  out.support = sel.support;
  for (Index j : out.support) out.support_names.push_back(names[static_cast<std::size_t>(j)]);
  out.lambda_star = sel.lambda_star;
  out.lambda_zero = sel.lambda_zero;
  out.flagged = sel.unreachable || static_cast<Index>(out.support.size()) != cfg.d;
  out.gammas = bundle.design.gammas;
  out.path = std::move(sel.path);
  out.subsample = bundle.subsample;
  out.times = bundle.times;
  for (const auto& f : bundle.frames) {
    out.tangents.push_back({f.center, f.neighbor_count, f.spectral_gap, f.singular_values});
  }
  for (const auto& x : bundle.design.blocks) {
    if (static_cast<Index>(out.support.size()) < cfg.d) {
      out.support_conditioning.push_back(0.0);
      continue;
    }
    Eigen::MatrixXd xs(x.rows(), static_cast<Index>(out.support.size()));
    for (std::size_t c = 0; c < out.support.size(); ++c) xs.col(static_cast<Index>(c)) = x.col(out.support[c]);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(xs).singularValues();
    out.support_conditioning.push_back(sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0);
  }
  return out;
}

std::string support_key(const std::vector<Index>& support, const std::vector<std::string>& names) {
  std::string key;
  for (Index j : support) {
    if (!key.empty()) key += '+';
    key += names.at(static_cast<std::size_t>(j));
  }
  return key.empty() ? "EMPTY" : key;
}

ReplicateSummary replicate(const PointCloud& cloud, const GradientProvider& dict, const RunConfig& cfg) {
  cfg.validate(cloud.n());
  ReplicateSummary summary;
  summary.names = dict.names();
  summary.replicates.resize(static_cast<std::size_t>(cfg.omega));
  parallel_for(summary.replicates.size(), cfg.threads, [&](std::size_t r) {
    RunConfig one = cfg;
    one.seed = cfg.seed + r;
    one.threads = 1;
    one.subsample.clear();
    ReplicateOutcome& rec = summary.replicates[r];
    rec.replicate = static_cast<Index>(r);
    rec.seed = one.seed;
    try {
      const RunResult res = run(cloud, dict, one);
      rec.support = res.support;
      rec.lambda_star = res.lambda_star;
      rec.flagged = res.flagged;
    } catch (const Error& e) {
      rec.failed = true;
      rec.error = e.what();
    }
  });
  for (const auto& rec : summary.replicates) {
    ++summary.support_counts[rec.failed ? std::string("FAILED") : support_key(rec.support, summary.names)];
  }
  return summary;
}

namespace {

nlohmann::json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

nlohmann::json to_json(const RunConfig& cfg) {
  return {{"d", cfg.d},
          {"r_n", cfg.r_n},
          {"epsilon_n", cfg.epsilon_n},
          {"n_prime", cfg.n_prime},
          {"omega", cfg.omega},
          {"seed", cfg.seed},
          {"kernel", to_string(cfg.kernel)},
          {"lambda_rule", to_string(cfg.lambda_rule)},
          {"normalize_over", to_string(cfg.normalize_over)},
          {"tol", cfg.path.solver.tol},
          {"max_iter", cfg.path.solver.max_iter}};
}

nlohmann::json to_json(const RunResult& result, const std::vector<std::string>& names) {
  nlohmann::json j;
  j["schema"] = 1;
  j["support"] = result.support;
  j["support_names"] = result.support_names;
  j["lambda_star"] = result.lambda_star;
  j["lambda_zero"] = result.lambda_zero;
  j["flagged"] = result.flagged;
  j["names"] = names;
  j["gammas"] = vec_json(result.gammas);
  j["subsample"] = result.subsample;
  auto& path = j["path"] = nlohmann::json::array();
  for (const auto& pt : result.path) {
    path.push_back({{"lambda", pt.lambda}, {"support", pt.support}, {"group_norms", vec_json(pt.group_norms)}});
  }
  auto& tang = j["tangents"] = nlohmann::json::array();
  for (const auto& t : result.tangents) {
    tang.push_back({{"point", t.point},
                    {"neighbors", t.neighbor_count},
                    {"spectral_gap", t.spectral_gap},
                    {"eigenvalues", vec_json(t.eigenvalues)}});
  }
  j["support_conditioning"] = result.support_conditioning;
  j["timings"] = {{"tangent_s", result.times.tangent_s},
                  {"gradients_s", result.times.gradients_s},
                  {"projection_s", result.times.projection_s},
                  {"solve_s", result.times.solve_s}};
  return j;
}

nlohmann::json to_json(const ReplicateSummary& summary) {
  nlohmann::json j;
  j["schema"] = 1;
  j["names"] = summary.names;
  j["support_counts"] = summary.support_counts;
  auto& reps = j["replicates"] = nlohmann::json::array();
  for (const auto& r : summary.replicates) {
    nlohmann::json e = {{"replicate", r.replicate}, {"seed", r.seed}, {"failed", r.failed}};
    if (r.failed) {
      e["error"] = r.error;
    } else {
      e["support"] = r.support;
      e["lambda_star"] = r.lambda_star;
      e["flagged"] = r.flagged;
    }
    reps.push_back(std::move(e));
  }
  return j;
}

}  // namespace tslasso
