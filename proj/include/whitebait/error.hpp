#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace whitebait {

// Bad input data or arguments. The CLI maps these to exit code 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed line in a JSONL or text file.
class ParseError : public InputError {
 public:
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : InputError(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Incompatible tensor shapes passed to an op.
class ShapeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// NaN or Inf produced or consumed by a numeric routine.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace whitebait
