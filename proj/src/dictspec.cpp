#include "tslasso/dictspec.hpp"

#include "tslasso/errors.hpp"

#include <fstream>

namespace tslasso {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& ref) {
  const std::filesystem::path p(ref);
  return p.is_absolute() ? p : base / p;
}

const json& field(const json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(ctx + ": missing field '" + key + "'");
  return obj.at(key);
}

template <typename T>
T as(const json& v, const std::string& ctx) {
  try {
    return v.get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(ctx + ": " + e.what());
  }
}

}  // namespace

std::unique_ptr<GradientProvider> DictionarySpec::provider() const {
  if (input == Input::kAmbient) return std::make_unique<AmbientGradients>(dictionary);
  return std::make_unique<PushforwardGradients>(dictionary, configs, *featurization);
}

DictionarySpec load_dictionary_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open dictionary spec " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  const std::string src = path.string();
  const auto base = path.parent_path();
  DictionarySpec spec;

  const std::string input = doc.contains("input") ? as<std::string>(doc["input"], src + ": input") : "ambient";
  if (input == "ambient") {
    spec.input = DictionarySpec::Input::kAmbient;
  } else if (input == "configurations") {
    spec.input = DictionarySpec::Input::kConfigurations;
  } else {
    throw ConfigError(src + ": input must be 'ambient' or 'configurations', got '" + input + "'");
  }

  Index atom_count = 0;
  if (spec.input == DictionarySpec::Input::kConfigurations) {
    const auto diagram_file = resolve(base, as<std::string>(field(doc, "bond_diagram", src), src + ": bond_diagram"));
    const auto configs_file = resolve(base, as<std::string>(field(doc, "configs", src), src + ": configs"));
    const auto fmap_file = resolve(base, as<std::string>(field(doc, "featurization", src), src + ": featurization"));
    spec.diagram = load_bond_diagram(diagram_file);
    atom_count = static_cast<Index>(spec.diagram->atoms.size());
    spec.configs = read_configs(configs_file, spec.diagram->atoms);
    spec.featurization = read_featurization(fmap_file);
    spec.referenced_files = {diagram_file, configs_file, fmap_file};
  }

  const json& fns = field(doc, "functions", src);
  if (!fns.is_array()) throw ConfigError(src + ": 'functions' must be an array");
  std::vector<DictFunctionPtr> out;
  for (std::size_t k = 0; k < fns.size(); ++k) {
    const json& f = fns[k];
    const std::string ctx = src + ": functions[" + std::to_string(k) + "]";
    const auto kind = as<std::string>(field(f, "kind", ctx), ctx + ".kind");
    const auto name = as<std::string>(field(f, "name", ctx), ctx + ".name");
    if (kind == "coordinate") {
      out.push_back(std::make_shared<CoordinateFunction>(name, as<Index>(field(f, "index", ctx), ctx + ".index"),
                                                         as<Index>(field(f, "dim", ctx), ctx + ".dim")));
    } else if (kind == "linear") {
      const auto w = as<std::vector<double>>(field(f, "weights", ctx), ctx + ".weights");
      const double offset = f.contains("offset") ? as<double>(f["offset"], ctx + ".offset") : 0.0;
      out.push_back(std::make_shared<LinearFunction>(name, Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Index>(w.size())), offset));
    } else if (kind == "swissroll_angle") {
      const auto file = resolve(base, as<std::string>(field(f, "rotation", ctx), ctx + ".rotation"));
      spec.referenced_files.push_back(file);
      out.push_back(std::make_shared<SwissRollAngle>(name, read_raw_f64(file)));
    } else if (kind == "torsion") {
      if (spec.input != DictionarySpec::Input::kConfigurations) {
        throw ConfigError(ctx + ": torsions need input = configurations");
      }
      const auto atoms = as<std::vector<Index>>(field(f, "atoms", ctx), ctx + ".atoms");
      if (atoms.size() != 4) throw ConfigError(ctx + ".atoms: expected 4 atom indices");
      out.push_back(torsion({atoms[0], atoms[1], atoms[2], atoms[3]}, atom_count, name));
    } else {
      throw ConfigError(ctx + ": unknown kind '" + kind + "'");
    }
  }
  if (out.empty()) throw ConfigError(src + ": dictionary has no functions");
  try {
    spec.dictionary = Dictionary(std::move(out));
  } catch (const Error& e) {
    throw ConfigError(src + ": " + e.what());
  }
  return spec;
}

json coordinate_entry(const std::string& name, Index index, Index dim) {
  return {{"kind", "coordinate"}, {"name", name}, {"index", index}, {"dim", dim}};
}

json linear_entry(const std::string& name, const Eigen::VectorXd& weights, double offset) {
  return {{"kind", "linear"},
          {"name", name},
          {"weights", std::vector<double>(weights.data(), weights.data() + weights.size())},
          {"offset", offset}};
}

json swissroll_angle_entry(const std::string& name, const std::string& rotation_file) {
  return {{"kind", "swissroll_angle"}, {"name", name}, {"rotation", rotation_file}};
}

json torsion_entry(const std::string& name, const Quadruple& atoms) {
  return {{"kind", "torsion"}, {"name", name}, {"atoms", std::vector<Index>(atoms.begin(), atoms.end())}};
}

}  // namespace tslasso
