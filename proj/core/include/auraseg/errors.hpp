#pragma once

#include <stdexcept>
#include <string>

namespace auraseg {

// Every failure raised by the library derives from Error so callers (the CLI in
// particular) can map the whole family onto exit codes in one place.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ValueError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed manifest or config line; carries the 1-based line number.
class FormatError : public Error {
 public:
  FormatError(const std::string& message, int line);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class DecodeError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericsError : public Error {
 public:
  using Error::Error;
};

class LayoutError : public Error {
 public:
  using Error::Error;
};

}  // namespace auraseg
