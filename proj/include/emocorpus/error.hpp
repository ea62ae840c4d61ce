#pragma once

#include <stdexcept>
#include <string>

namespace emocorpus {

// Base of every error the library raises. The CLI maps the concrete type onto
// an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input (bad line, bad field, bad JSON).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input parses but violates a domain rule (unknown category, empty surface...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Internal data is inconsistent (span outside its token list, corrupt model).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Training diverged.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace emocorpus
