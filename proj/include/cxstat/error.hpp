#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cxstat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `offset` is the byte position where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Dimension, size, or shape mismatch between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A configuration the library can represent but refuses to run.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of an operation (h <= 0, n > N, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace cxstat
