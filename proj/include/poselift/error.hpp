#pragma once

#include <stdexcept>
#include <string>

namespace poselift {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(what) {}
};

// Carries the 1-based line number of the offending CSV row.
struct CsvError : Error {
  CsvError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_number(line) {}
  std::size_t line_number;
};

}  // namespace poselift
