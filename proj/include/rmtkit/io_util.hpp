#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rmtkit {

extern const char* const kToolVersion;

// 17 significant digits: re-parsing the text recovers the double bit-for-bit.
std::string format_full(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Both writers go through a temp file in the target directory plus rename, so
// a crashed run never leaves a partial file behind.
void write_text_atomic(const std::string& path, const std::string& body);
void write_csv(const std::string& path, const CsvTable& t);

std::uint64_t fnv1a(const std::string& bytes);

} // namespace rmtkit
