#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flowdir {

// Malformed or inconsistent input data (files, request bodies, node sets).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Numerical or algorithmic failure while evaluating a valid input.
class ComputeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A positive-demand origin-destination pair has no directed path.
class InfeasibleError : public ComputeError {
 public:
  InfeasibleError(int origin, int destination)
      : ComputeError("no directed path for positive-demand pair " + std::to_string(origin) + "->" +
                     std::to_string(destination)),
        origin_(origin),
        destination_(destination) {}

  int origin() const noexcept { return origin_; }
  int destination() const noexcept { return destination_; }

 private:
  int origin_;
  int destination_;
};

}  // namespace flowdir
