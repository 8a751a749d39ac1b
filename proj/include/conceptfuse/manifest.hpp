#ifndef CONCEPTFUSE_MANIFEST_HPP
#define CONCEPTFUSE_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "conceptfuse/ingest.hpp"

namespace cfuse {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a over the file bytes; enough to pin inputs to a published number.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string digest_hex(std::uint64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string file_digest(const std::filesystem::path& path) {
  return digest_hex(fnv1a64(detail::read_file(path)));
}

// Reproducibility record written next to every produced file.
struct RunManifest {
  std::string command;
  nlohmann::json params = nlohmann::json::object();
  std::map<std::string, std::string> input_digests;   // path -> digest
  std::map<std::string, std::string> output_digests;  // path -> digest

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["tool"] = "conceptfuse";
    j["version"] = kToolVersion;
    j["command"] = command;
    j["params"] = params;
    j["inputs"] = input_digests;
    j["outputs"] = output_digests;
    return j;
  }

  std::string digest() const { return digest_hex(fnv1a64(to_json().dump())); }

  void add_input(const std::filesystem::path& path) {
    input_digests[path.string()] = file_digest(path);
  }
  void add_output(const std::filesystem::path& path) {
    output_digests[path.string()] = file_digest(path);
  }

  // Written as <output>.manifest.json so every produced file references
  // its manifest (and through it, its own digest).
  void write_for(const std::filesystem::path& output) const {
    auto j = to_json();
    j["manifest_digest"] = digest();
    detail::atomic_write(output.string() + ".manifest.json", j.dump(2) + "\n");
  }
};

}  // namespace cfuse

#endif
