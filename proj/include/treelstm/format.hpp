#pragma once

#include <string>

namespace treelstm {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

// Inverse of format_double; throws ConfigError on malformed text.
double parse_double(const std::string& text);

}  // namespace treelstm
