#include "tslasso/config.hpp"

#include "tslasso/errors.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tslasso {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

IniFile IniFile::parse(const std::string& text, const std::string& source) {
  IniFile ini;
  ini.source_ = source;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    const std::string where = source + ":" + std::to_string(line) + ": ";
    if (s[0] == '[') {
      if (s.back() != ']') throw ConfigError(where + "unterminated section header '" + s + "'");
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) throw ConfigError(where + "empty section name");
      ini.sections_[section];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + s + "'");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + "missing key before '='");
    auto& sec = ini.sections_[section];
    if (sec.count(key)) {
      throw ConfigError(where + "duplicate key '" + key + "' (first set on line " + std::to_string(sec[key].line) + ")");
    }
    sec[key] = {value, line};
  }
  return ini;
}

IniFile IniFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void IniFile::require_known(const std::map<std::string, std::set<std::string>>& allowed) const {
  for (const auto& [name, entries] : sections_) {
    const auto it = allowed.find(name);
    if (it == allowed.end()) {
      int line = entries.empty() ? 0 : entries.begin()->second.line;
      throw ConfigError(source_ + (line ? ":" + std::to_string(line) : std::string()) + ": unknown section [" + name + "]");
    }
    for (const auto& [key, entry] : entries) {
      if (!it->second.count(key)) {
        throw ConfigError(source_ + ":" + std::to_string(entry.line) + ": unknown key '" + key + "' in section [" +
                          name + "]");
      }
    }
  }
}

const IniFile::Entry* IniFile::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return nullptr;
  const auto k = s->second.find(key);
  return k == s->second.end() ? nullptr : &k->second;
}

bool IniFile::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

std::optional<std::string> IniFile::get(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  return e->value;
}

void IniFile::bad_value(const std::string& section, const std::string& key, const std::string& expected) const {
  const Entry* e = find(section, key);
  throw ConfigError(source_ + ":" + std::to_string(e->line) + ": key '" + key + "' expects " + expected + ", got '" +
                    e->value + "'");
}

namespace {

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* b = s.data();
  const char* e = b + s.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && ptr == e;
}

}  // namespace

std::optional<double> IniFile::get_double(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  double v = 0.0;
  if (!parse_number(e->value, v)) bad_value(section, key, "a number");
  return v;
}

std::optional<long long> IniFile::get_int(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  long long v = 0;
  if (!parse_number(e->value, v)) bad_value(section, key, "an integer");
  return v;
}

std::optional<unsigned long long> IniFile::get_uint(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  unsigned long long v = 0;
  if (!parse_number(e->value, v)) bad_value(section, key, "a non-negative integer");
  return v;
}

std::optional<bool> IniFile::get_bool(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  bad_value(section, key, "true or false");
}

}  // namespace tslasso
