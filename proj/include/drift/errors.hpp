#pragma once

#include <stdexcept>
#include <string>

namespace drift {

// Invalid configuration or specification of a run (CLI exit code 2).
class SpecError : public std::runtime_error {
 public:
  explicit SpecError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent input data (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace drift
