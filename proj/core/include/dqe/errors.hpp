#pragma once

#include <stdexcept>

namespace dqe {

// Error taxonomy mirrored by the CLI exit codes: argument and precondition
// problems map to exit 1, file/data problems raise FormatError (exit 2), and
// violated numerical invariants raise NumericError (exit 3).

/// A file or data stream is malformed, truncated, or degenerate.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical invariant was breached (trace drift, lost Hermiticity, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A requested problem size exceeds a configured cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dqe
