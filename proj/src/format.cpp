#include "treelstm/format.hpp"

#include <charconv>
#include <system_error>

#include "treelstm/errors.hpp"

namespace treelstm {

std::string format_double(double value) {
  char buffer[64];
  auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buffer, end);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [end, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || end != last) throw ConfigError("malformed number '" + text + "'");
  return value;
}

}  // namespace treelstm
