#pragma once

#include <stdexcept>
#include <string>

namespace pseudoview {

// Bad caller input: mismatched dimensions, malformed files, invalid
// configuration, insufficient data. The CLI maps these to exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or truncated file payload.
class FormatError : public ValidationError {
 public:
  FormatError(const std::string& what, long long byte_offset)
      : ValidationError(what + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}
  long long byte_offset() const { return byte_offset_; }

 private:
  long long byte_offset_;
};

// A point cannot be projected (on or behind the image plane) or passes
// behind the target camera.
class GeometryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Degenerate numerical problem, e.g. a rank-deficient calibration system.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Cascade orchestration failure: uncertifiable pose or a back end that
// broke its contract.
class CascadeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pseudoview
