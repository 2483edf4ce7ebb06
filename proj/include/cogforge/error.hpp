#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cogforge {

/// Bad or inconsistent input data. The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input; carries the 1-based line (or 0-based byte offset
/// for single-line formats such as Newick).
class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t position, const std::string& what)
      : DataError(source + ":" + std::to_string(position) + ": " + what),
        position_(position),
        detail_(what) {}

  std::size_t position() const { return position_; }
  /// The message without the source and position prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::size_t position_;
  std::string detail_;
};

/// Invalid parameters supplied by the caller (exit code 1 in the CLI).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace cogforge
