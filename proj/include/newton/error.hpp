#pragma once

#include <stdexcept>
#include <string>

namespace newton {

// Shape/length violations on the functional datapath.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid architecture or design-point configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Network description parse failure. Carries 1-based line/column.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string msg, std::size_t line, std::size_t column)
      : std::runtime_error(format(msg, line, column)),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& msg, std::size_t line,
                            std::size_t column) {
    return "line " + std::to_string(line) + ", column " +
           std::to_string(column) + ": " + msg;
  }

  std::size_t line_;
  std::size_t column_;
};

// Layer chain does not line up (channels or spatial size).
class ChainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Mapping does not fit the provisioned hardware.
class CapacityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file could not be opened.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numeric path failed its equivalence suite.
class VerificationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace newton
