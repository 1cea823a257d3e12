#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace dbr {

inline constexpr const char* kToolVersion = "0.3.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& data);
std::string hex64(std::uint64_t v);

/// Stable text form: sorted keys, two-space indent, trailing newline.
std::string dump_report(const nlohmann::json& j);

/// Adds tool_version, config_hash (over the canonical config dump), seed and mesh.
void stamp_report(nlohmann::json& report, const nlohmann::json& config, std::uint64_t seed, double mesh);

void write_text_file(const std::string& path, const std::string& text);

/// Locale-independent shortest round-trip formatting of a double.
std::string fmt_double(double v);

}  // namespace dbr
