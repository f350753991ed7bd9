#pragma once

#include <stdexcept>
#include <string>

namespace agrifid {

// Base of every error raised by the library. Callers that only need to report
// a failure can catch this; the subclasses exist for tests and exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Structural CSV problems (ragged rows, empty file).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A token that is not a decimal real.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class CommitteeSizeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Refusal to run an exhaustive computation that would not terminate in time.
class SizeError : public Error {
 public:
  using Error::Error;
};

}  // namespace agrifid
