#ifndef BDHPD_ERRORS_HPP
#define BDHPD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bdhpd {

// Base class for all library errors. CLI maps NumericError to exit code 2,
// everything else derived from Error to exit code 1.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid configuration values (bad kernel size, unknown config key, ...).
class ConfigError : public Error {
public:
  using Error::Error;
};

// Structurally valid request on unusable input data (waveform too short,
// empty feature sequence, ...).
class InputError : public Error {
public:
  using Error::Error;
};

// Binary/file format violations (WAV header, FTRX magic, checkpoint).
class FormatError : public Error {
public:
  using Error::Error;
};

// Text parse failures; carries a line number when one is known.
class ParseError : public Error {
public:
  using Error::Error;
};

// Unknown identifier lookups (language/dataset not registered).
class LookupError : public Error {
public:
  using Error::Error;
};

// Tensor shape mismatches.
class DimensionError : public Error {
public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
public:
  using Error::Error;
};

// Operation misuse (argument out of range, empty selection).
class UsageError : public Error {
public:
  using Error::Error;
};

} // namespace bdhpd

#endif
