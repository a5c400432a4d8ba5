#pragma once

#include <cstddef>
#include <string>
#include <string_view>

// Character offsets throughout caselab count Unicode code points, not bytes.
namespace caselab::utf8 {

/// Invalid sequences decode to U+FFFD, one per offending byte.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
std::string encode(char32_t c);

std::size_t length(std::string_view text);

/// Code-point slice [char_start, char_end) of a UTF-8 string. Clamped to the text.
std::string slice(std::string_view text, std::size_t char_start, std::size_t char_end);

bool is_space(char32_t c) noexcept;
/// ASCII and common CJK/full-width punctuation.
bool is_punct(char32_t c) noexcept;
bool is_ascii_alnum(char32_t c) noexcept;

} // namespace caselab::utf8
