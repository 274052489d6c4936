// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irshield {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Geometry or radio parameters that cannot describe a physical setup.
class InvalidScenario : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation's precondition (shape mismatch, short series, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Configuration text could not be parsed. line is 1-based, 0 if unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Configuration parsed but a key holds an unacceptable value.
class ValidationError : public Error {
 public:
  ValidationError(std::string key, const std::string& what)
      : Error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Trace, observation or report file violates its schema.
class IngestError : public Error {
 public:
  using Error::Error;
};

class UndefinedCoherence : public Error {
 public:
  using Error::Error;
};

}  // namespace irshield
