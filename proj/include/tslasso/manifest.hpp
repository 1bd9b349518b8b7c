#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace tslasso {

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// manifest.json in `dir`: schema, generator name, seed, the spec used and a
/// SHA-256 per file (names relative to `dir`). Contains no timestamps.
void write_manifest(const std::filesystem::path& dir, const std::string& generator, std::uint64_t seed,
                    const nlohmann::json& spec, const std::vector<std::string>& files);

/// Checks every file listed in the manifest. Throws IOError naming the first
/// missing or mismatched file.
void verify_manifest(const std::filesystem::path& manifest_path);

}  // namespace tslasso
