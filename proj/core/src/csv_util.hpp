#pragma once

// Small CSV helpers shared by the file readers.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "mabrl/error.hpp"

namespace mabrl::csv {

inline std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

// Splits on commas; a trailing empty field is kept.
inline std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double to_double(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw FormatError("line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

inline long long to_int(const std::string& s, std::size_t line) {
  const double v = to_double(s, line);
  if (v != std::floor(v)) {
    throw FormatError("line " + std::to_string(line) + ": expected an integer, got '" + s + "'");
  }
  return static_cast<long long>(v);
}

}  // namespace mabrl::csv
