#pragma once

#include <stdexcept>
#include <string>

namespace netid {

/// Violated model structure or misuse of an interface contract.
class StructuralError : public std::runtime_error {
 public:
  explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical breakdown: divergence, singular systems, failed convergence.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file; message carries "file:line: reason".
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& file, int line, const std::string& reason)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + reason),
        file_(file),
        line_(line) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

 private:
  std::string file_;
  int line_;
};

}  // namespace netid
