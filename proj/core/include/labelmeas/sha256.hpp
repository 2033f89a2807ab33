#pragma once

#include <string>

namespace labelmeas {

/// Hex-encoded SHA-256 digest of a byte string.
std::string sha256_hex(const std::string& data);

/// Digest of a file's contents; throws data_error if the file cannot be read.
std::string sha256_file(const std::string& path);

}  // namespace labelmeas
