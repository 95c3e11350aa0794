#ifndef SPHONIC_ERRORS_HPP
#define SPHONIC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sphonic {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value violates an operation's domain (bad range, degenerate input).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Tensor or signal dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Invalid or unsupported configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File or stream I/O failed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// A numerical self-check exceeded its limit.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace sphonic

#endif
