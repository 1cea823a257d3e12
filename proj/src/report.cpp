#include "dbar_range/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "dbar_range/errors.hpp"

namespace dbr {

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string dump_report(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void stamp_report(nlohmann::json& report, const nlohmann::json& config, std::uint64_t seed, double mesh) {
  report["tool_version"] = kToolVersion;
  report["config"] = config;
  report["config_hash"] = hex64(fnv1a64(config.dump()));
  report["seed"] = seed;
  report["mesh"] = mesh;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << text;
  if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace dbr
