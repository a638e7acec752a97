#pragma once

// Report plumbing: content hashing for reproducibility stamps and consistent
// number formatting for CSV output.

#include <cstdint>
#include <string>

namespace ellrig {

/// SHA-1 of a byte string, lowercase hex.
std::string sha1_hex(const std::string& bytes);

/// Git-style blob hash of a file's content ("blob <len>\0<bytes>").
/// Throws ValidationError when the file cannot be read.
std::string content_hash_file(const std::string& path);

/// Shortest-exact formatting used by every CSV writer ("%.17g").
std::string fmt(double v);

}  // namespace ellrig
