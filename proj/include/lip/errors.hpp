#pragma once

#include <stdexcept>
#include <string>

namespace lip {

// Every error raised by the library carries a short kind tag and the exit
// code the command-line tool reports for it.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what, int code)
      : std::runtime_error(what), kind_(std::move(kind)), code_(code) {}

  const std::string& kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return code_; }

 private:
  std::string kind_;
  int code_;
};

// shape, format, parse, validity, config, spec errors
class ValidationError : public Error {
 public:
  ValidationError(std::string kind, const std::string& what)
      : Error(std::move(kind), what, 2) {}
};

// conditioning, gap and other numerical failures
class NumericalError : public Error {
 public:
  NumericalError(std::string kind, const std::string& what)
      : Error(std::move(kind), what, 3) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what, 4) {}
};

// Load errors that point at a cell. row and col are 1-based, col = 0 when the
// whole row is at fault.
class MatrixFormatError : public ValidationError {
 public:
  MatrixFormatError(std::string kind, const std::string& what, long row, long col)
      : ValidationError(std::move(kind), what), row_(row), col_(col) {}

  long row() const noexcept { return row_; }
  long col() const noexcept { return col_; }

 private:
  long row_;
  long col_;
};

}  // namespace lip
