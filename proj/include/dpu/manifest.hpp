#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace dpu {

// Per-command run record. The manifest hash covers the command, config
// hash, seed and artifact content hashes - not the timings - so identical
// configured runs produce identical manifest hashes.
struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> artifacts;  // name -> path
  std::map<std::string, double> timings_s;

  void add_artifact(const std::string& name, const std::string& path);
  std::uint64_t manifest_hash() const;  // hashes artifact file contents
  void save(const std::string& path) const;
};

RunManifest load_manifest(const std::string& path);
std::uint64_t hash_file(const std::string& path);

}  // namespace dpu
