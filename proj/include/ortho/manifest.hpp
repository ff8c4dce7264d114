#ifndef ORTHO_MANIFEST_HPP
#define ORTHO_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ortho {

inline constexpr const char* kToolVersion = "orthopair 0.1.0";

// Reproducibility record written into every output directory. Rerunning a
// command with an identical manifest (same inputs, config, seed) produces
// byte-identical outputs; honor SOURCE_DATE_EPOCH so the manifest itself can
// be reproduced too.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config; // ordered snapshot
  std::vector<std::pair<std::string, std::string>> inputs; // path -> content hash
  std::uint64_t seed = 0;
  std::string tool_version = kToolVersion;
  std::string timestamp; // UTC ISO-8601

  void add_config(const std::string& key, const std::string& value);
  void add_input(const std::filesystem::path& path); // hashes the file

  std::string to_json() const;
  void write(const std::filesystem::path& dir) const; // dir/manifest.json
};

std::string file_hash_hex(const std::filesystem::path& path);
std::string current_timestamp(); // SOURCE_DATE_EPOCH override supported

} // namespace ortho

#endif
