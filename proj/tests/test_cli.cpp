#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "tslasso/cli.hpp"
#include "tslasso/config.hpp"
#include "tslasso/errors.hpp"
#include "tslasso/manifest.hpp"
#include "tslasso/synth.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

using namespace tslasso;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "tslasso");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

// Cached small swiss roll shared by several cases.
const fs::path& roll_dir() {
  static const fs::path dir = [] {
    const fs::path d = tstest::temp_dir("cli_roll");
    const Outcome o = cli({"generate", "--kind", "swissroll", "--n", "400", "--seed", "3", "--out", d.string()});
    REQUIRE(o.code == 0);
    return d;
  }();
  return dir;
}

class WrongGradient final : public DictFunction {
 public:
  WrongGradient() : DictFunction("wrong") {}
  Index input_dim() const override { return 2; }
  double value(const Eigen::VectorXd& x) const override { return x(0) * x(1); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override { return Eigen::Vector2d(x(1), 1.01 * x(0)); }
};

}  // namespace

TEST_CASE("ini parsing") {
  const IniFile ini = IniFile::parse("# top\nname = x\n[run]\n; note\n d = 2\nr_n=1.5\nwarm_start = true\n", "t.ini");
  CHECK(ini.get("", "name") == "x");
  CHECK(ini.get_int("run", "d") == 2);
  CHECK(ini.get_double("run", "r_n") == 1.5);
  CHECK(ini.get_bool("run", "warm_start") == true);
  CHECK_FALSE(ini.get("run", "omega").has_value());

  CHECK_THROWS_WITH_AS(IniFile::parse("[run]\nd = 1\nd = 2\n", "t.ini"), doctest::Contains("t.ini:3"), ConfigError);
  CHECK_THROWS_WITH_AS(IniFile::parse("[run]\njunk\n", "t.ini"), doctest::Contains("t.ini:2"), ConfigError);
  CHECK_THROWS_WITH_AS(IniFile::parse("[run\n", "t.ini"), doctest::Contains("t.ini:1"), ConfigError);
  const IniFile bad = IniFile::parse("[run]\nd = two\n", "t.ini");
  CHECK_THROWS_WITH_AS(bad.get_int("run", "d"), doctest::Contains("t.ini:2"), ConfigError);
  const IniFile unknown = IniFile::parse("[run]\nd = 2\nradius = 3\n", "t.ini");
  CHECK_THROWS_WITH_AS(unknown.require_known({{"run", {"d"}}}), doctest::Contains("'radius'"), ConfigError);
}

TEST_CASE("run section defaults epsilon to r_n") {
  RunConfig cfg;
  apply_run_section(IniFile::parse("[run]\nr_n = 4\n"), cfg);
  CHECK(cfg.r_n == 4.0);
  CHECK(cfg.epsilon_n == 4.0);
  apply_run_section(IniFile::parse("[run]\nr_n = 4\nepsilon_n = 2\nkernel = constant\n"), cfg);
  CHECK(cfg.epsilon_n == 2.0);
  CHECK(cfg.kernel == KernelKind::kConstant);
}

TEST_CASE("generate writes the files and a reproducible manifest") {
  const fs::path a = tstest::temp_dir("cli_gen_a");
  const fs::path b = tstest::temp_dir("cli_gen_b");
  for (const auto& d : {a, b}) {
    const Outcome o = cli({"generate", "--kind", "ethanol", "--n", "200", "--seed", "4", "--out", d.string()});
    REQUIRE(o.code == 0);
  }
  for (const char* f : {"points.f64", "truth.csv", "configs.f64", "featurization.f64", "bonds.json", "dictionary.json",
                        "manifest.json"}) {
    CHECK(fs::exists(a / f));
  }
  const auto ma = read_json(a / "manifest.json");
  const auto mb = read_json(b / "manifest.json");
  CHECK(ma["files"].size() == 6);
  CHECK(ma["files"] == mb["files"]);
  CHECK(ma["seed"] == 4);
  CHECK_NOTHROW(verify_manifest(a / "manifest.json"));

  const auto sr = read_json(roll_dir() / "manifest.json");
  CHECK(sr["files"].size() == 4);
}

TEST_CASE("generate from a config file") {
  const fs::path d = tstest::temp_dir("cli_gen_ini");
  write_text(d / "gen.ini", "[generate]\nkind = swissroll\nn = 50\nseed = 2\nambient_dim = 5\n");
  const Outcome ok = cli({"generate", "--config", (d / "gen.ini").string(), "--out", (d / "out").string()});
  CHECK(ok.code == 0);
  CHECK(read_json(d / "out" / "manifest.json")["spec"]["ambient_dim"] == 5);

  write_text(d / "bad.ini", "[generate]\nkind = swissroll\nnn = 50\n");
  const Outcome bad = cli({"generate", "--config", (d / "bad.ini").string(), "--out", (d / "o2").string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("bad.ini:3") != std::string::npos);
  CHECK(bad.err.find("'nn'") != std::string::npos);
}

TEST_CASE("run selects the swiss roll intrinsics") {
  const fs::path out = tstest::temp_dir("cli_run");
  const fs::path& d = roll_dir();
  const Outcome o = cli({"run", "--data", (d / "points.f64").string(), "--dictionary", (d / "dictionary.json").string(),
                         "--r-n", "6", "--n-prime", "100", "--out", out.string()});
  REQUIRE(o.code == 0);
  const auto r = read_json(out / "result.json");
  CHECK(r["support_names"] == nlohmann::json::array({"g1", "g2"}));
  CHECK(r["config"]["epsilon_n"] == 6.0);
  CHECK(fs::exists(out / "path.csv"));
}

TEST_CASE("replicate and path write their outputs") {
  const fs::path out = tstest::temp_dir("cli_rep");
  const fs::path& d = roll_dir();
  const std::vector<std::string> common{"--data", (d / "points.f64").string(), "--dictionary",
                                        (d / "dictionary.json").string(), "--r-n", "6", "--n-prime", "80"};
  auto args = common;
  args.insert(args.begin(), "replicate");
  for (const char* s : {"--omega", "3", "--out"}) args.emplace_back(s);
  args.push_back((out / "rep").string());
  REQUIRE(cli(args).code == 0);
  CHECK(read_json(out / "rep" / "replicates.json")["support_counts"]["g1+g2"] == 3);
  std::ifstream freq(out / "rep" / "frequency.csv");
  std::string header, row;
  std::getline(freq, header);
  std::getline(freq, row);
  CHECK(header == "support,count");
  CHECK(row == "g1+g2,3");

  args = common;
  args.insert(args.begin(), "path");
  args.emplace_back("--out");
  args.push_back((out / "path").string());
  REQUIRE(cli(args).code == 0);
  CHECK(fs::exists(out / "path" / "path.csv"));
}

TEST_CASE("missing or tampered inputs fail with exit 1") {
  const fs::path& d = roll_dir();
  const Outcome missing = cli({"run", "--data", "/nonexistent/points.f64", "--dictionary",
                               (d / "dictionary.json").string(), "--no-verify"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("/nonexistent/points.f64") != std::string::npos);

  const fs::path copy = tstest::temp_dir("cli_tamper");
  for (const auto& e : fs::directory_iterator(d)) fs::copy_file(e.path(), copy / e.path().filename());
  {
    std::ofstream f(copy / "truth.csv", std::ios::app);
    f << "0,0\n";
  }
  const Outcome tampered = cli({"run", "--data", (copy / "points.f64").string(), "--dictionary",
                                (copy / "dictionary.json").string(), "--r-n", "6", "--n-prime", "50"});
  CHECK(tampered.code == 1);
  CHECK(tampered.err.find("truth.csv") != std::string::npos);
  const Outcome skipped = cli({"run", "--data", (copy / "points.f64").string(), "--dictionary",
                               (copy / "dictionary.json").string(), "--r-n", "6", "--n-prime", "50", "--no-verify",
                               "--out", (copy / "r").string()});
  CHECK(skipped.code == 0);
}

TEST_CASE("diagnose") {
  const fs::path out = tstest::temp_dir("cli_diag");
  const fs::path& d = roll_dir();
  const std::vector<std::string> base{"diagnose", "--data", (d / "points.f64").string(), "--dictionary",
                                      (d / "dictionary.json").string(), "--r-n", "6", "--n-prime", "60"};
  auto wrong = base;
  for (const char* s : {"--support", "g1"}) wrong.emplace_back(s);
  CHECK(cli(wrong).code == 2);

  auto good = base;
  for (const char* s : {"--support", "g1,1", "--lambda", "1", "--out"}) good.emplace_back(s);
  good.push_back(out.string());
  REQUIRE(cli(good).code == 0);
  const auto j = read_json(out / "diagnostics.json");
  CHECK(j["support_names"] == nlohmann::json::array({"g1", "g2"}));
  CHECK(j.contains("lambda_ok"));
  CHECK(fs::exists(out / "cosines.csv"));

  // a dictionary with only the two intrinsics has nothing outside S
  auto spec = read_json(d / "dictionary.json");
  spec["functions"].erase(spec["functions"].begin() + 2, spec["functions"].end());
  write_text(d / "pair.json", spec.dump());
  auto pair = base;
  pair[4] = (d / "pair.json").string();
  for (const char* s : {"--support", "g1,g2", "--no-verify", "--out"}) pair.emplace_back(s);
  pair.push_back((out / "pair").string());
  REQUIRE(cli(pair).code == 0);
  const auto p = read_json(out / "pair" / "diagnostics.json");
  CHECK(p["mu_s"] == 0.0);
  CHECK(p.contains("mu_s_note"));
}

TEST_CASE("check-gradients") {
  const fs::path out = tstest::temp_dir("cli_grad");
  const fs::path& d = roll_dir();
  const Outcome amb = cli({"check-gradients", "--dictionary", (d / "dictionary.json").string(), "--points",
                           (d / "points.f64").string(), "--out", (out / "roll.json").string()});
  CHECK(amb.code == 0);
  const auto ra = read_json(out / "roll.json");
  CHECK(ra["pass"] == true);
  for (const auto& f : ra["functions"]) {
    const std::string name = f["name"];
    if (name[0] == 'x') CHECK(f["max_relative_error"].get<double>() <= 1e-12);
  }

  const fs::path eth = tstest::temp_dir("cli_grad_eth");
  REQUIRE(cli({"generate", "--kind", "ethanol", "--n", "150", "--sigma", "0.01", "--out", eth.string()}).code == 0);
  const Outcome tor = cli({"check-gradients", "--dictionary", (eth / "dictionary.json").string(), "--out",
                           (out / "eth.json").string()});
  CHECK(tor.code == 0);
  const auto re = read_json(out / "eth.json");
  CHECK(re["functions"].size() == 12);
  for (const auto& f : re["functions"]) CHECK(f["max_relative_error"].get<double>() <= 1e-5);

  const Dictionary bad(std::vector<DictFunctionPtr>{std::make_shared<WrongGradient>()});
  Rng rng(1);
  const GradientReport rep = check_dictionary_gradients(bad, tstest::gaussian_matrix(20, 2, rng), 1e-5, 1e-4);
  CHECK_FALSE(rep.pass());
  CHECK(rep.checks[0].max_relative_error > 1e-3);
}

TEST_CASE("help and usage errors") {
  for (const char* cmd : {"generate", "run", "replicate", "path", "diagnose", "check-gradients"}) {
    const Outcome o = cli({cmd, "--help"});
    CHECK_MESSAGE(o.code == 0, cmd);
    CHECK(!o.out.empty());
  }
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"run", "--data", "x"}).code == 2);
}
