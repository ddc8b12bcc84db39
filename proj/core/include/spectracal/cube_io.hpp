#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "spectracal/cube.hpp"

namespace spectracal {

/// HSIC file layout (little-endian):
///   "HSIC" | u16 version = 1 | u16 reserved = 0 | u32 H | u32 W | u32 B
///   | B x f64 wavelengths (nm) | H*W*B x f32 values (pixel-major, band innermost)
inline constexpr std::uint16_t kHsicVersion = 1;

void write_cube(const HsiCube& cube, const std::filesystem::path& path);
HsiCube read_cube(const std::filesystem::path& path);

/// `<stem>.meta.json` next to a cube file.
std::filesystem::path meta_path(const std::filesystem::path& cube_path);
void write_meta(const std::filesystem::path& cube_path, const nlohmann::json& meta);
std::optional<nlohmann::json> read_meta(const std::filesystem::path& cube_path);

/// Deterministic text for JSON artifacts (sorted keys, fixed indent, trailing newline).
void write_json_file(const std::filesystem::path& path, const nlohmann::json& value);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace spectracal
