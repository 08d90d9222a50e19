#pragma once

#include <string>
#include <string_view>

namespace seqtag::utf8 {

// Decodes UTF-8 into Unicode scalar values. Invalid byte sequences decode
// to U+FFFD, one replacement per offending byte, so decoding is total.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view chars);
std::string encode(char32_t c);

// Number of Unicode scalar values in a UTF-8 string.
std::size_t length(std::string_view bytes);

// Slice by scalar-value offsets, [start, end) end-exclusive.
std::u32string slice(const std::u32string& text, std::size_t start, std::size_t end);

}  // namespace seqtag::utf8
