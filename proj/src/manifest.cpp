#include "ortho/manifest.hpp"

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "ortho/error.hpp"
#include "ortho/rng.hpp"

namespace ortho {

std::string file_hash_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for hashing: " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    h = fnv1a(std::string_view(buf, static_cast<std::size_t>(in.gcount())), h);
    if (in.eof()) break;
  }
  char hex[32];
  std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::string current_timestamp() {
  std::time_t now;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) {
    now = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  } else {
    now = std::time(nullptr);
  }
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void RunManifest::add_config(const std::string& key, const std::string& value) {
  config.emplace_back(key, value);
}

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.emplace_back(path.string(), file_hash_hex(path));
}

namespace {
std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
    case '"': out += "\\\""; break;
    case '\\': out += "\\\\"; break;
    case '\n': out += "\\n"; break;
    case '\r': out += "\\r"; break;
    case '\t': out += "\\t"; break;
    default:
      if (static_cast<unsigned char>(c) < 0x20) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "\\u%04x", c);
        out += buf;
      } else {
        out += c;
      }
    }
  }
  return out;
}
} // namespace

std::string RunManifest::to_json() const {
  std::ostringstream out;
  out << "{\n";
  out << "  \"command\": \"" << json_escape(command) << "\",\n";
  out << "  \"config\": {";
  for (std::size_t k = 0; k < config.size(); ++k) {
    if (k) out << ",";
    out << "\n    \"" << json_escape(config[k].first) << "\": \"" << json_escape(config[k].second)
        << "\"";
  }
  out << (config.empty() ? "},\n" : "\n  },\n");
  out << "  \"inputs\": {";
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (k) out << ",";
    out << "\n    \"" << json_escape(inputs[k].first) << "\": \"" << json_escape(inputs[k].second)
        << "\"";
  }
  out << (inputs.empty() ? "},\n" : "\n  },\n");
  out << "  \"seed\": " << seed << ",\n";
  out << "  \"tool_version\": \"" << json_escape(tool_version) << "\",\n";
  out << "  \"timestamp\": \"" << json_escape(timestamp) << "\"\n";
  out << "}\n";
  return out.str();
}

void RunManifest::write(const std::filesystem::path& dir) const {
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + (dir / "manifest.json").string());
  out << to_json();
  if (!out) throw DataError("write failed: " + (dir / "manifest.json").string());
}

} // namespace ortho
