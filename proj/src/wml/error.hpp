#pragma once

#include <stdexcept>
#include <string>

namespace wml {

enum class ErrorKind {
  Syntax,
  UnknownIdentifier,
  Domain,
  Validation,
  Overflow,
  Quadrature,
  NoConvergence,
  Shooting,
  StepUnderflow,
  UnknownPreset,
  Usage,
};

const char* to_string(ErrorKind kind);

// Base exception for every failure raised by the library. The C API maps the
// kind onto a status code, so throw sites should pick the most specific kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t offset, std::string expected, const std::string& what)
      : Error(ErrorKind::Syntax, what), offset_(offset), expected_(std::move(expected)) {}
  std::size_t offset() const noexcept { return offset_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::string expected_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorKind::Validation, what) {}
};

}  // namespace wml
