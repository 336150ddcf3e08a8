#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ebm::io {

/// Round-trip-safe decimal formatting: 17 significant digits, '.' separator.
std::string g17(double v);

/// Write-to-temp then rename: no partial files on error.
void atomic_write_text(const std::filesystem::path& path, std::string_view content);

std::string read_text(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

} // namespace ebm::io
