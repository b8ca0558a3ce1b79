#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qcrsim {

// FNV-1a 64-bit content hash, hex-encoded; used to stamp outputs with the
// configuration they came from.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string fnv1a64_hex(const std::string& text);

std::string read_text_file(const std::string& path);  // throws ParseError
void write_text_file(const std::string& path, const std::string& content);

// "qcrsim <version> config_hash=<hex>" provenance line for CSV headers.
std::string provenance_line(const std::string& config_hash);

}  // namespace qcrsim
