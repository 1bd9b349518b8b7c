#include "tslasso/cli.hpp"

#include "tslasso/diagnostics.hpp"
#include "tslasso/dictspec.hpp"
#include "tslasso/errors.hpp"
#include "tslasso/manifest.hpp"
#include "tslasso/parallel.hpp"
#include "tslasso/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace tslasso {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kRunKeys = {"d",          "r_n",      "epsilon_n", "n_prime", "omega",
                                        "seed",       "kernel",   "lambda_rule", "normalize_over", "tol",
                                        "max_iter",   "zero_tol", "rel_tol",   "max_probes", "grid_size",
                                        "warm_start", "threads"};
const std::set<std::string> kGenerateKeys = {"kind",  "n",     "seed",  "ambient_dim", "t_min",
                                             "t_max", "h_min", "h_max", "sigma",       "grid",
                                             "noise_space", "freeze_g2", "frozen_g2", "feature_dim"};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// Command-line overrides for RunConfig; only options given on the command
// line are applied.
struct RunFlags {
  Index d = 0;
  double r_n = 0, epsilon_n = 0, tol = 0, zero_tol = 0;
  Index n_prime = 0, omega = 0, max_iter = 0, grid_size = 0;
  std::uint64_t seed = 0;
  std::string kernel, lambda_rule, normalize_over;
  unsigned threads = 0;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app, bool with_omega) {
    opts["d"] = app->add_option("--d", d, "intrinsic dimension");
    opts["r_n"] = app->add_option("--r-n", r_n, "neighborhood radius");
    opts["epsilon_n"] = app->add_option("--epsilon-n", epsilon_n, "kernel bandwidth (default: r_n)");
    opts["n_prime"] = app->add_option("--n-prime", n_prime, "subsample size");
    if (with_omega) opts["omega"] = app->add_option("--omega", omega, "number of replicates");
    opts["seed"] = app->add_option("--seed", seed, "random seed");
    opts["kernel"] = app->add_option("--kernel", kernel, "constant, epanechnikov or gaussian");
    opts["lambda_rule"] = app->add_option("--lambda-rule", lambda_rule, "binary-search or last-surviving");
    opts["normalize_over"] = app->add_option("--normalize-over", normalize_over, "subsample or all");
    opts["tol"] = app->add_option("--tol", tol, "solver tolerance");
    opts["max_iter"] = app->add_option("--max-iter", max_iter, "solver iteration cap");
    opts["zero_tol"] = app->add_option("--zero-tol", zero_tol, "group norm counted as zero below this");
    opts["grid_size"] = app->add_option("--grid-size", grid_size, "lambda grid size for path and last-surviving");
    opts["threads"] = app->add_option("--threads", threads, "worker threads (0: available parallelism)");
  }

  bool given(const std::string& key) const {
    const auto it = opts.find(key);
    return it != opts.end() && it->second->count() > 0;
  }

  void apply(RunConfig& cfg, bool eps_from_file) const {
    if (given("d")) cfg.d = d;
    if (given("r_n")) {
      cfg.r_n = r_n;
      if (!eps_from_file) cfg.epsilon_n = r_n;
    }
    if (given("epsilon_n")) cfg.epsilon_n = epsilon_n;
    if (given("n_prime")) cfg.n_prime = n_prime;
    if (given("omega")) cfg.omega = omega;
    if (given("seed")) cfg.seed = seed;
    if (given("kernel")) cfg.kernel = parse_kernel_kind(kernel);
    if (given("lambda_rule")) cfg.lambda_rule = parse_lambda_rule(lambda_rule);
    if (given("normalize_over")) cfg.normalize_over = parse_normalize_over(normalize_over);
    if (given("tol")) cfg.path.solver.tol = tol;
    if (given("max_iter")) cfg.path.solver.max_iter = max_iter;
    if (given("zero_tol")) cfg.path.zero_tol = zero_tol;
    if (given("grid_size")) cfg.path.grid_size = grid_size;
    if (given("threads")) cfg.threads = threads;
  }
};

struct DataArgs {
  std::string data, dictionary, config, out = ".", manifest;
  bool no_verify = false;

  void add(CLI::App* app) {
    app->add_option("--data", data, "point cloud (raw-binary-f64, or .csv)")->required();
    app->add_option("--dictionary", dictionary, "dictionary spec JSON")->required();
    app->add_option("--config", config, "INI config file ([run] section)");
    app->add_option("--out", out, "output directory");
    app->add_option("--manifest", manifest, "manifest to verify (default: manifest.json next to --data)");
    app->add_flag("--no-verify", no_verify, "skip manifest hash verification");
  }
};

struct Loaded {
  PointCloud cloud;
  DictionarySpec spec;
  std::unique_ptr<GradientProvider> provider;
  RunConfig cfg;
};

Loaded load_inputs(const DataArgs& args, const RunFlags& flags) {
  RunConfig cfg;
  cfg.threads = 0;
  bool eps_from_file = false;
  if (!args.config.empty()) {
    const IniFile ini = IniFile::load(args.config);
    ini.require_known({{"run", kRunKeys}, {"generate", kGenerateKeys}});
    apply_run_section(ini, cfg);
    eps_from_file = ini.has("run", "epsilon_n");
  }
  flags.apply(cfg, eps_from_file);
  if (cfg.threads == 0) cfg.threads = default_threads();

  if (!fs::exists(args.data)) throw IOError("data file not found: " + args.data);
  if (!args.no_verify) {
    const fs::path manifest = args.manifest.empty() ? fs::path(args.data).parent_path() / "manifest.json"
                                                    : fs::path(args.manifest);
    if (!fs::exists(manifest)) {
      throw IOError("no manifest at " + manifest.string() + "; pass --manifest or --no-verify");
    }
    verify_manifest(manifest);
  }
  PointCloud cloud = load_matrix(args.data);
  DictionarySpec spec = load_dictionary_spec(args.dictionary);
  if (spec.dictionary.input_dim() != cloud.dim() && spec.input == DictionarySpec::Input::kAmbient) {
    throw ConfigError("dictionary functions take " + std::to_string(spec.dictionary.input_dim()) +
                      " inputs but the data has dimension " + std::to_string(cloud.dim()));
  }
  if (spec.input == DictionarySpec::Input::kConfigurations) {
    if (static_cast<Index>(spec.configs.size()) != cloud.n()) {
      throw ConfigError("configs file has " + std::to_string(spec.configs.size()) + " rows, data has " +
                        std::to_string(cloud.n()));
    }
    if (spec.featurization->dim() != cloud.dim()) {
      throw ConfigError("featurization dimension does not match the data dimension");
    }
  }
  auto provider = spec.provider();
  return {std::move(cloud), std::move(spec), std::move(provider), cfg};
}

fs::path ensure_dir(const std::string& dir) {
  fs::create_directories(dir);
  return fs::path(dir);
}

std::vector<Index> parse_support(const std::string& text, const std::vector<std::string>& names) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto it = std::find(names.begin(), names.end(), item);
    if (it != names.end()) {
      out.push_back(static_cast<Index>(it - names.begin()));
      continue;
    }
    Index idx = -1;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), idx);
    if (ec != std::errc() || ptr != item.data() + item.size() || idx < 0 ||
        idx >= static_cast<Index>(names.size())) {
      throw ConfigError("support entry '" + item + "' is neither a function name nor a valid index");
    }
    out.push_back(idx);
  }
  return out;
}

// ---- generate -------------------------------------------------------------

struct GenerateArgs {
  std::string config, kind, out = ".", grid, noise_space;
  Index n = 0, ambient_dim = 0, feature_dim = 0;
  std::uint64_t seed = 0;
  double sigma = 0;
  bool freeze_g2 = false;
  unsigned threads = 0;
  std::map<std::string, CLI::Option*> opts;

  bool given(const std::string& k) const { return opts.at(k)->count() > 0; }
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  IniFile ini;
  if (!a.config.empty()) {
    ini = IniFile::load(a.config);
    ini.require_known({{"generate", kGenerateKeys}, {"run", kRunKeys}});
  }
  std::string kind = ini.get("generate", "kind").value_or("");
  if (a.given("kind")) kind = a.kind;
  if (kind.empty()) throw ConfigError("generator kind not set (use --kind or 'kind' in [generate])");
  const unsigned threads = a.threads == 0 ? default_threads() : a.threads;
  const fs::path dir = ensure_dir(a.out);

  auto count = [&](const char* key, Index fallback, const char* flag) -> Index {
    Index v = fallback;
    if (auto x = ini.get_int("generate", key)) v = static_cast<Index>(*x);
    if (a.given(flag)) v = flag == std::string("n") ? a.n : flag == std::string("ambient_dim") ? a.ambient_dim : a.feature_dim;
    return v;
  };
  std::uint64_t seed = ini.get_uint("generate", "seed").value_or(0);
  if (a.given("seed")) seed = a.seed;

  if (kind == "swissroll") {
    for (const char* k : {"sigma", "grid", "noise_space", "freeze_g2", "frozen_g2", "feature_dim"}) {
      if (ini.has("generate", k)) throw ConfigError(a.config + ": key '" + k + "' does not apply to kind swissroll");
    }
    SwissRollSpec s;
    s.n = count("n", s.n, "n");
    s.ambient_dim = count("ambient_dim", s.ambient_dim, "ambient_dim");
    s.seed = seed;
    s.t_min = ini.get_double("generate", "t_min").value_or(s.t_min);
    s.t_max = ini.get_double("generate", "t_max").value_or(s.t_max);
    s.h_min = ini.get_double("generate", "h_min").value_or(s.h_min);
    s.h_max = ini.get_double("generate", "h_max").value_or(s.h_max);
    s.validate();
    SwissRollData data = swiss_roll(s, threads);

    write_matrix(dir / "points.f64", data.cloud.points(), MatrixFormat::kRawF64);
    write_matrix(dir / "rotation.f64", data.rotation, MatrixFormat::kRawF64);
    write_matrix_csv(dir / "truth.csv", data.truth, {"t", "h"});
    json dict;
    dict["schema"] = 1;
    dict["input"] = "ambient";
    auto& fns = dict["functions"] = json::array();
    fns.push_back(swissroll_angle_entry("g1", "rotation.f64"));
    fns.push_back(linear_entry("g2", data.rotation.col(1)));
    for (Index j = 0; j < s.ambient_dim; ++j) fns.push_back(coordinate_entry("x" + std::to_string(j), j, s.ambient_dim));
    write_json(dir / "dictionary.json", dict);
    const json spec_json = {{"kind", kind}, {"n", s.n}, {"ambient_dim", s.ambient_dim}, {"t_min", s.t_min},
                            {"t_max", s.t_max}, {"h_min", s.h_min}, {"h_max", s.h_max}};
    write_manifest(dir, "swissroll", seed, spec_json, {"points.f64", "rotation.f64", "truth.csv", "dictionary.json"});
    out << "wrote swiss roll (n=" << s.n << ", D=" << s.ambient_dim << ") to " << dir.string() << '\n';
    return 0;
  }
  if (kind == "ethanol") {
    for (const char* k : {"ambient_dim", "t_min", "t_max", "h_min", "h_max"}) {
      if (ini.has("generate", k)) throw ConfigError(a.config + ": key '" + k + "' does not apply to kind ethanol");
    }
    RigidEthanolSpec s;
    s.n = count("n", s.n, "n");
    s.feature_dim = count("feature_dim", s.feature_dim, "feature_dim");
    s.seed = seed;
    s.sigma = ini.get_double("generate", "sigma").value_or(s.sigma);
    if (a.given("sigma")) s.sigma = a.sigma;
    if (auto g = ini.get("generate", "grid")) s.grid = parse_torsion_grid(*g);
    if (a.given("grid")) s.grid = parse_torsion_grid(a.grid);
    if (auto ns = ini.get("generate", "noise_space")) s.noise_space = parse_noise_space(*ns);
    if (a.given("noise_space")) s.noise_space = parse_noise_space(a.noise_space);
    s.freeze_g2 = ini.get_bool("generate", "freeze_g2").value_or(false) || a.freeze_g2;
    s.frozen_g2 = ini.get_double("generate", "frozen_g2").value_or(s.frozen_g2);
    s.validate();
    RigidEthanolData data = rigid_ethanol(s, threads);

    write_matrix(dir / "points.f64", data.cloud.points(), MatrixFormat::kRawF64);
    write_matrix_csv(dir / "truth.csv", data.truth, {"g1", "g2"});
    write_configs(dir / "configs.f64", data.configs);
    write_featurization(dir / "featurization.f64", data.featurization);
    save_bond_diagram(dir / "bonds.json", data.diagram);
    json dict;
    dict["schema"] = 1;
    dict["input"] = "configurations";
    dict["configs"] = "configs.f64";
    dict["featurization"] = "featurization.f64";
    dict["bond_diagram"] = "bonds.json";
    auto& fns = dict["functions"] = json::array();
    const auto quads = bond_torsions(data.diagram);
    for (Index j = 0; j < data.dictionary.p(); ++j) {
      fns.push_back(torsion_entry(data.dictionary[j].name(), quads[static_cast<std::size_t>(j)]));
    }
    write_json(dir / "dictionary.json", dict);
    const json spec_json = {{"kind", kind},
                            {"n", s.n},
                            {"sigma", s.sigma},
                            {"grid", to_string(s.grid)},
                            {"noise_space", to_string(s.noise_space)},
                            {"freeze_g2", s.freeze_g2},
                            {"frozen_g2", s.frozen_g2},
                            {"feature_dim", s.feature_dim}};
    write_manifest(dir, "ethanol", seed, spec_json,
                   {"points.f64", "truth.csv", "configs.f64", "featurization.f64", "bonds.json", "dictionary.json"});
    out << "wrote rigid ethanol (n=" << s.n << ", sigma=" << s.sigma << ", D=" << s.feature_dim << ") to "
        << dir.string() << '\n';
    return 0;
  }
  throw ConfigError("unknown generator kind '" + kind + "' (expected swissroll or ethanol)");
}

// ---- run / replicate / path / diagnose -----------------------------------

int cmd_run(const DataArgs& args, const RunFlags& flags, std::ostream& out) {
  Loaded in = load_inputs(args, flags);
  const RunResult res = run(in.cloud, *in.provider, in.cfg);
  const auto names = in.provider->names();
  const fs::path dir = ensure_dir(args.out);
  json j = to_json(res, names);
  j["config"] = to_json(in.cfg);
  write_json(dir / "result.json", j);
  write_path_csv(dir / "path.csv", res.path);
  out << "support:";
  for (const auto& n : res.support_names) out << ' ' << n;
  out << (res.flagged ? "  (flagged: lambda rule could not reach d functions)" : "") << '\n';
  out << "lambda* = " << fmt(res.lambda_star) << ", lambda0 = " << fmt(res.lambda_zero) << '\n';
  return 0;
}

int cmd_replicate(const DataArgs& args, const RunFlags& flags, std::ostream& out) {
  Loaded in = load_inputs(args, flags);
  const ReplicateSummary sum = replicate(in.cloud, *in.provider, in.cfg);
  const fs::path dir = ensure_dir(args.out);
  json j = to_json(sum);
  j["config"] = to_json(in.cfg);
  write_json(dir / "replicates.json", j);

  std::vector<std::pair<std::string, Index>> rows(sum.support_counts.begin(), sum.support_counts.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  std::ofstream csv(dir / "frequency.csv");
  if (!csv) throw IOError("cannot write " + (dir / "frequency.csv").string());
  csv << "support,count\n";
  for (const auto& [key, c] : rows) {
    csv << key << ',' << c << '\n';
    out << std::setw(4) << c << "  " << key << '\n';
  }
  return 0;
}

int cmd_path(const DataArgs& args, const RunFlags& flags, std::ostream& out) {
  Loaded in = load_inputs(args, flags);
  const DesignBundle bundle = build_design(in.cloud, *in.provider, in.cfg);
  const auto path = regularization_path(bundle.design, in.cfg.path);
  const fs::path dir = ensure_dir(args.out);
  write_path_csv(dir / "path.csv", path);
  out << "lambda0 = " << fmt(lambda_zero(bundle.design)) << ", " << path.size() << " grid points\n";
  return 0;
}

int cmd_diagnose(const DataArgs& args, const RunFlags& flags, const std::string& support_text,
                 const CLI::Option* lambda_opt, double lambda, std::ostream& out) {
  Loaded in = load_inputs(args, flags);
  const auto names = in.provider->names();
  const auto support = parse_support(support_text, names);
  if (static_cast<Index>(support.size()) != in.cfg.d) {
    throw ConfigError("--support lists " + std::to_string(support.size()) + " functions but d = " +
                      std::to_string(in.cfg.d));
  }
  const DesignBundle bundle = build_design(in.cloud, *in.provider, in.cfg);
  std::optional<double> lam;
  if (lambda_opt->count() > 0) lam = lambda;
  const DiagnosticsReport rep = sampled_conditions(bundle.design, support, bundle.ambient_norms, lam);
  const fs::path dir = ensure_dir(args.out);
  write_json(dir / "diagnostics.json", to_json(rep, names));
  write_matrix_csv(dir / "cosines.csv", rep.cosine_matrix, names);
  out << "mu_S = " << fmt(rep.mu_s) << ", nu_S = " << fmt(rep.nu_s) << ", b_S = " << fmt(rep.b_s) << '\n';
  out << "incoherence condition: " << (rep.incoherence_ok ? "holds" : "fails") << " (" << fmt(rep.incoherence_value)
      << ")\n";
  if (lam) out << "lambda condition: " << (rep.lambda_ok ? "holds" : "fails") << '\n';
  return 0;
}

// ---- check-gradients -------------------------------------------------------

struct GradArgs {
  std::string dictionary, points, out;
  Index count = 100;
  std::uint64_t seed = 0;
  double h = 1e-5;
  double threshold = 1e-4;
};

int cmd_check_gradients(const GradArgs& a, std::ostream& out) {
  const DictionarySpec spec = load_dictionary_spec(a.dictionary);
  Eigen::MatrixXd inputs;
  if (!a.points.empty()) {
    inputs = load_matrix(a.points).points();
  } else if (spec.input == DictionarySpec::Input::kConfigurations) {
    inputs.resize(static_cast<Index>(spec.configs.size()), spec.dictionary.input_dim());
    for (std::size_t i = 0; i < spec.configs.size(); ++i) inputs.row(static_cast<Index>(i)) = spec.configs[i].flat().transpose();
  } else {
    throw ConfigError("--points is required for ambient dictionaries");
  }
  if (inputs.cols() != spec.dictionary.input_dim()) {
    throw ConfigError("points have " + std::to_string(inputs.cols()) + " columns, dictionary expects " +
                      std::to_string(spec.dictionary.input_dim()));
  }
  Eigen::MatrixXd sample = inputs;
  if (a.count > 0 && a.count < inputs.rows()) {
    Rng rng(a.seed);
    const auto rows = sample_without_replacement(static_cast<std::size_t>(inputs.rows()), static_cast<std::size_t>(a.count), rng);
    sample.resize(a.count, inputs.cols());
    for (Index k = 0; k < a.count; ++k) sample.row(k) = inputs.row(static_cast<Index>(rows[static_cast<std::size_t>(k)]));
  }
  const GradientReport rep = check_dictionary_gradients(spec.dictionary, sample, a.h, a.threshold);
  json j;
  j["schema"] = 1;
  j["threshold"] = rep.threshold;
  j["pass"] = rep.pass();
  auto& arr = j["functions"] = json::array();
  for (const auto& c : rep.checks) {
    arr.push_back({{"name", c.name},
                   {"max_relative_error", c.max_relative_error},
                   {"points_checked", c.points_checked},
                   {"points_skipped", c.points_skipped}});
    out << std::left << std::setw(24) << c.name << ' ' << std::scientific << std::setprecision(3)
        << c.max_relative_error << std::defaultfloat << (c.max_relative_error > rep.threshold ? "  FAIL" : "") << '\n';
  }
  if (!a.out.empty()) {
    const fs::path p(a.out);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_json(p, j);
  }
  return rep.pass() ? 0 : 1;
}

}  // namespace

void apply_run_section(const IniFile& ini, RunConfig& cfg) {
  const std::string s = "run";
  if (auto v = ini.get_int(s, "d")) cfg.d = static_cast<Index>(*v);
  if (auto v = ini.get_double(s, "r_n")) cfg.r_n = cfg.epsilon_n = *v;
  if (auto v = ini.get_double(s, "epsilon_n")) cfg.epsilon_n = *v;
  if (auto v = ini.get_int(s, "n_prime")) cfg.n_prime = static_cast<Index>(*v);
  if (auto v = ini.get_int(s, "omega")) cfg.omega = static_cast<Index>(*v);
  if (auto v = ini.get_uint(s, "seed")) cfg.seed = *v;
  if (auto v = ini.get(s, "kernel")) cfg.kernel = parse_kernel_kind(*v);
  if (auto v = ini.get(s, "lambda_rule")) cfg.lambda_rule = parse_lambda_rule(*v);
  if (auto v = ini.get(s, "normalize_over")) cfg.normalize_over = parse_normalize_over(*v);
  if (auto v = ini.get_double(s, "tol")) cfg.path.solver.tol = *v;
  if (auto v = ini.get_int(s, "max_iter")) cfg.path.solver.max_iter = static_cast<Index>(*v);
  if (auto v = ini.get_double(s, "zero_tol")) cfg.path.zero_tol = *v;
  if (auto v = ini.get_double(s, "rel_tol")) cfg.path.rel_tol = *v;
  if (auto v = ini.get_int(s, "max_probes")) cfg.path.max_probes = static_cast<Index>(*v);
  if (auto v = ini.get_int(s, "grid_size")) cfg.path.grid_size = static_cast<Index>(*v);
  if (auto v = ini.get_bool(s, "warm_start")) cfg.path.warm_start = *v;
  if (auto v = ini.get_uint(s, "threads")) cfg.threads = static_cast<unsigned>(*v);
}

bool GradientReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [&](const GradientCheck& c) { return c.max_relative_error <= threshold; });
}

GradientReport check_dictionary_gradients(const Dictionary& dict, const Eigen::MatrixXd& points, double h,
                                          double threshold) {
  GradientReport rep;
  rep.threshold = threshold;
  for (Index j = 0; j < dict.p(); ++j) rep.checks.push_back(check_gradient(dict[j], points, h));
  return rep;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tangent space lasso: select dictionary functions that parametrize a sampled manifold", "tslasso"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write a synthetic dataset with manifest");
  g->add_option("--config", gen.config, "INI file with a [generate] section");
  gen.opts["kind"] = g->add_option("--kind", gen.kind, "swissroll or ethanol");
  g->add_option("--out", gen.out, "output directory");
  gen.opts["seed"] = g->add_option("--seed", gen.seed, "random seed");
  gen.opts["n"] = g->add_option("--n", gen.n, "number of points");
  gen.opts["ambient_dim"] = g->add_option("--ambient-dim", gen.ambient_dim, "swiss roll ambient dimension");
  gen.opts["feature_dim"] = g->add_option("--feature-dim", gen.feature_dim, "ethanol feature dimension after SVD");
  gen.opts["sigma"] = g->add_option("--sigma", gen.sigma, "ethanol noise standard deviation");
  gen.opts["grid"] = g->add_option("--grid", gen.grid, "uniform-grid or uniform-random");
  gen.opts["noise_space"] = g->add_option("--noise-space", gen.noise_space, "atoms or features");
  g->add_flag("--freeze-g2", gen.freeze_g2, "hold the hydroxyl torsion fixed (d = 1 variant)");
  g->add_option("--threads", gen.threads, "worker threads (0: available parallelism)");

  DataArgs run_args, rep_args, path_args, diag_args;
  RunFlags run_flags, rep_flags, path_flags, diag_flags;
  auto* r = app.add_subcommand("run", "select a support on one subsample");
  run_args.add(r);
  run_flags.add(r, false);
  auto* rp = app.add_subcommand("replicate", "repeat the selection over omega subsamples");
  rep_args.add(rp);
  rep_flags.add(rp, true);
  auto* pa = app.add_subcommand("path", "regularization path on a lambda grid");
  path_args.add(pa);
  path_flags.add(pa, false);
  auto* dg = app.add_subcommand("diagnose", "sampled recovery conditions for a given support");
  diag_args.add(dg);
  diag_flags.add(dg, false);
  std::string support_text;
  double lambda = 0.0;
  dg->add_option("--support", support_text, "comma-separated function names or indices")->required();
  auto* lambda_opt = dg->add_option("--lambda", lambda, "also evaluate the lambda condition");

  GradArgs grad;
  auto* cg = app.add_subcommand("check-gradients", "compare analytic gradients with finite differences");
  cg->add_option("--dictionary", grad.dictionary, "dictionary spec JSON")->required();
  cg->add_option("--points", grad.points, "input points (default: the spec's configurations)");
  cg->add_option("--count", grad.count, "number of random points to check (0: all)");
  cg->add_option("--seed", grad.seed, "seed for the point sample");
  cg->add_option("--step", grad.h, "finite-difference step");
  cg->add_option("--threshold", grad.threshold, "maximum accepted relative error");
  cg->add_option("--out", grad.out, "write the report as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*g) return cmd_generate(gen, out);
    if (*r) return cmd_run(run_args, run_flags, out);
    if (*rp) return cmd_replicate(rep_args, rep_flags, out);
    if (*pa) return cmd_path(path_args, path_flags, out);
    if (*dg) return cmd_diagnose(diag_args, diag_flags, support_text, lambda_opt, lambda, out);
    if (*cg) return cmd_check_gradients(grad, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace tslasso
