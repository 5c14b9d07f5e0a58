#pragma once

#include <stdexcept>
#include <string>

namespace cfx {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file: CSV, schema config, fixture or run config.
class LoadError : public Error {
 public:
  using Error::Error;
};

// Caller passed an argument outside the operation's domain (k too large,
// arity mismatch, invalid grid step, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Run configuration or command-line arguments are unusable.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

// Model file could not be decoded.
class ModelFormatError : public Error {
 public:
  enum class Kind { kCorrupt, kVersionMismatch, kSchemaMismatch };

  ModelFormatError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

}  // namespace cfx
