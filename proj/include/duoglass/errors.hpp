#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace duoglass {

// Base class of every failure thrown by this library.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Argument values or type invariants are out of contract.
class validation_error : public error {
 public:
  using error::error;
};

// Malformed textual input. Positions are 1-based; 0 means not applicable.
class parse_error : public error {
 public:
  explicit parse_error(const std::string& what_arg, std::size_t line = 0,
                       std::size_t column = 0)
      : error(decorate(what_arg, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string decorate(const std::string& msg, std::size_t line,
                              std::size_t column) {
    if (line == 0) return msg;
    std::string out = "line " + std::to_string(line);
    if (column != 0) out += ", column " + std::to_string(column);
    out += ": " + msg;
    return out;
  }

  std::size_t line_;
  std::size_t column_;
};

// The file system failed us.
class io_error : public error {
 public:
  using error::error;
};

// The request is well formed but not defined for this configuration.
class unsupported_error : public error {
 public:
  using error::error;
};

}  // namespace duoglass
