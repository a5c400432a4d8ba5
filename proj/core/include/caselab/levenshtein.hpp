#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace caselab {

/// Unit-cost edit distance over code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
std::size_t levenshtein(std::string_view a_utf8, std::string_view b_utf8);

/// Index of the candidate closest to `unit`; ties go to the smallest index.
/// `candidates` must be non-empty.
std::size_t nearest_by_edit_distance(std::string_view unit, std::span<const std::string> candidates);

} // namespace caselab
