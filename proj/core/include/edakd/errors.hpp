#pragma once

#include <stdexcept>
#include <string>

namespace edakd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor shapes that do not satisfy an operation's contract.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values or arguments (bad group counts, empty pools, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or gradient encountered while training.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

/// Non-finite model output at inference time.
class InferenceError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable files.
class FormatError : public Error {
 public:
  using Error::Error;
};

}  // namespace edakd
