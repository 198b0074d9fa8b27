#include "dpu/manifest.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dpu/config.hpp"
#include "dpu/rng.hpp"

namespace dpu {

std::uint64_t hash_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("hash_file: cannot open " + path);
  std::uint64_t h = 0xCBF29CE484222325ull;
  char buf[8192];
  while (is.read(buf, sizeof buf) || is.gcount() > 0)
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(is.gcount())), h);
  return h;
}

void RunManifest::add_artifact(const std::string& name, const std::string& path) {
  artifacts[name] = path;
}

std::uint64_t RunManifest::manifest_hash() const {
  std::ostringstream os;
  os << command << '\n' << hash_hex(config_hash) << '\n' << seed << '\n';
  for (const auto& [name, path] : artifacts)
    os << name << ' ' << hash_hex(hash_file(path)) << '\n';
  return fnv1a(os.str());
}

void RunManifest::save(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("manifest: cannot open " + path);
  os << "command = " << command << '\n';
  os << "config_hash = " << hash_hex(config_hash) << '\n';
  os << "seed = " << seed << '\n';
  for (const auto& [name, p] : artifacts) os << "artifact." << name << " = " << p << '\n';
  for (const auto& [name, t] : timings_s) os << "timing." << name << " = " << t << '\n';
  os << "manifest_hash = " << hash_hex(manifest_hash()) << '\n';
}

RunManifest load_manifest(const std::string& path) {
  const Config kv = Config::parse_file(path);
  RunManifest m;
  m.command = kv.get_str("command", "");
  const std::string ch = kv.get_str("config_hash", "0");
  m.config_hash = std::strtoull(ch.c_str(), nullptr, 16);
  m.seed = static_cast<std::uint64_t>(kv.get_int("seed", 0));
  for (const auto& [k, v] : kv.values()) {
    if (k.rfind("artifact.", 0) == 0) m.artifacts[k.substr(9)] = v;
    if (k.rfind("timing.", 0) == 0) m.timings_s[k.substr(7)] = std::strtod(v.c_str(), nullptr);
  }
  return m;
}

}  // namespace dpu
