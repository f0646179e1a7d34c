#pragma once

#include <stdexcept>
#include <string>

namespace btm {

/// Malformed file contents or inconsistent inputs read from disk.
struct InputFormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A file could not be opened for reading or writing.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Snapshot and vocabulary (or test stream) disagree on K or W.
struct ModelMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise unusable arithmetic results.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace btm
