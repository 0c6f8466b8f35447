#pragma once

#include <stdexcept>
#include <string>

namespace mixsum {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: config fields, malformed files, contract violations.
/// Surfaces as exit code 1 at the CLI.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Failure while running: missing cache entries, non-finite gradients, I/O.
/// Surfaces as exit code 2 at the CLI.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

/// Every anchor in the batch lacks a positive. The trainer skips such
/// batches instead of aborting the epoch.
class DegenerateBatchError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

}  // namespace mixsum
