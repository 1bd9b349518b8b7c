#include "tslasso/manifest.hpp"

#include "tslasso/errors.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>

namespace tslasso {

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOError("cannot open " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0 && EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount())) != 1) {
      throw Error("sha256 update failed");
    }
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), md.data(), &len) != 1) throw Error("sha256 final failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

void write_manifest(const std::filesystem::path& dir, const std::string& generator, std::uint64_t seed,
                    const nlohmann::json& spec, const std::vector<std::string>& files) {
  nlohmann::json m;
  m["schema"] = 1;
  m["generator"] = generator;
  m["seed"] = seed;
  m["spec"] = spec;
  nlohmann::json hashes = nlohmann::json::object();
  for (const auto& f : files) hashes[f] = sha256_file(dir / f);
  m["files"] = hashes;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IOError("cannot write " + (dir / "manifest.json").string());
  out << m.dump(2) << '\n';
}

void verify_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IOError("cannot open manifest " + manifest_path.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(manifest_path.string() + ": invalid JSON: " + e.what());
  }
  if (!m.contains("files") || !m["files"].is_object()) {
    throw FormatError(manifest_path.string() + ": missing 'files' object");
  }
  const auto dir = manifest_path.parent_path();
  for (const auto& [name, hash] : m["files"].items()) {
    const auto file = dir / name;
    if (!std::filesystem::exists(file)) throw IOError("manifest lists missing file " + file.string());
    if (sha256_file(file) != hash.get<std::string>()) {
      throw IOError("hash mismatch for " + file.string() + " (rerun with --no-verify to skip the check)");
    }
  }
}

}  // namespace tslasso
