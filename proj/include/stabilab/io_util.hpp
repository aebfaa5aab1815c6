#pragma once

#include <string>

namespace stabilab {

// Shortest round-trip decimal representation; keeps CSV output byte-stable.
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace stabilab
