#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace graphmem {

// Error categories double as process exit codes for the CLI.
enum class ErrorKind : int {
  kUsage = 1,
  kConfig = 2,
  kData = 3,
  kNumeric = 4,
  kFormat = 5,
  kInternal = 6,
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) { }

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string &what)
      : Error(ErrorKind::kConfig, what) { }
};

class DataError : public Error {
public:
  explicit DataError(const std::string &what): Error(ErrorKind::kData, what) { }
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string &what)
      : Error(ErrorKind::kNumeric, what) { }
};

class FormatError : public Error {
public:
  explicit FormatError(const std::string &what)
      : Error(ErrorKind::kFormat, what) { }
};

// Shape mismatch between tensor operands. Always a programming error on the
// caller side, so it reports as internal.
class DimensionError : public Error {
public:
  explicit DimensionError(const std::string &what)
      : Error(ErrorKind::kInternal, what) { }
};

} // namespace graphmem
