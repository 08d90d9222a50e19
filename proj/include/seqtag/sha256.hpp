#pragma once

#include <string>
#include <string_view>

namespace seqtag::io {

// SHA-256 of a byte string / file, as lowercase hex.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file_hex(const std::string& path);

}  // namespace seqtag::io
