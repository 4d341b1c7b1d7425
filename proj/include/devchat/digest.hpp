#pragma once

#include <string>
#include <string_view>

namespace devchat {

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// Digest of a file's contents. Throws ValidationError if it cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace devchat
