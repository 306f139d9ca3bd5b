#pragma once

#include <stdexcept>
#include <string>

namespace epgp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed inputs: non-finite values, shape mismatches, out-of-range sizes.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Inconsistent or incomplete configuration (missing PDE parameter, unknown
// ids, empty domains, checkpoint/solution mismatch).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Cholesky breakdown or non-finite objective values.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what, long minor_index = -1)
      : Error(what), minor_index_(minor_index) {}

  // Leading minor that failed to be positive definite, or -1.
  [[nodiscard]] long minor_index() const noexcept { return minor_index_; }

 private:
  long minor_index_;
};

// Unreadable, truncated, or version-incompatible files.
class LoadError : public Error {
 public:
  using Error::Error;
};

}  // namespace epgp
