#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace caselab {

/// 64-bit FNV-1a. Stable across platforms; used for fingerprints and cache keys.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;
std::string hex64(std::uint64_t value);
inline std::string fingerprint(std::string_view data) { return hex64(fnv1a64(data)); }

/// Shortest decimal form that round-trips (e.g. 1.4 -> "1.4").
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Splits on '\n', dropping a trailing '\r'. A final empty line is not reported.
std::vector<std::string> split_lines(std::string_view text);

std::string_view trim(std::string_view text);

/// Trims ASCII and Unicode whitespace (including U+3000).
std::string trim_unicode(std::string_view text);

std::string utc_timestamp();

} // namespace caselab
