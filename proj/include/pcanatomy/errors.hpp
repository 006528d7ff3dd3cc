#pragma once

#include <stdexcept>
#include <string>

namespace pcanatomy {

/// Bad command-line usage or invalid argument values. CLI exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent input data (parse failures, missing columns,
/// duplicate keys, invalid cell values). CLI exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical estimation failures (rank deficiency, empty samples,
/// non-convergence, singular covariance blocks). CLI exit code 3.
class EstimationError : public std::runtime_error {
 public:
  explicit EstimationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pcanatomy
