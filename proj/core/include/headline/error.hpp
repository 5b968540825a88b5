#pragma once

#include <stdexcept>
#include <string>

namespace headline {

// Runtime failure (I/O, numerical divergence). The CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: malformed files, invalid configuration, failed
// preconditions on data. The CLI maps it to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

}  // namespace headline
