#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

namespace tslasso {

/// INI-style key-value file:
///   # comment        ; comment
///   [section]
///   key = value
/// Keys before any section header belong to the section "". Duplicate keys
/// and malformed lines raise ConfigError with the line number.
class IniFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static IniFile parse(const std::string& text, const std::string& source = "<string>");
  static IniFile load(const std::filesystem::path& path);

  /// Throws ConfigError naming the first section not in `sections` or key not
  /// in `allowed[section]`.
  void require_known(const std::map<std::string, std::set<std::string>>& allowed) const;

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> get(const std::string& section, const std::string& key) const;

  // Typed getters; a malformed value raises ConfigError with line and key.
  std::optional<double> get_double(const std::string& section, const std::string& key) const;
  std::optional<long long> get_int(const std::string& section, const std::string& key) const;
  std::optional<unsigned long long> get_uint(const std::string& section, const std::string& key) const;
  std::optional<bool> get_bool(const std::string& section, const std::string& key) const;

  const std::string& source() const { return source_; }
  const std::map<std::string, std::map<std::string, Entry>>& sections() const { return sections_; }

 private:
  const Entry* find(const std::string& section, const std::string& key) const;
  [[noreturn]] void bad_value(const std::string& section, const std::string& key, const std::string& expected) const;

  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

}  // namespace tslasso
