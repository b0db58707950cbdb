#pragma once

#include <stdexcept>
#include <string>

namespace rotdiv {

enum class ErrorKind {
  input,              // malformed or out-of-range arguments
  cap_exceeded,       // enumeration / detector size cap
  hypothesis,         // a theorem precondition does not hold for the input
  retries_exhausted,  // randomized construction hit its try budget
  estimation,         // not enough data for a statistical estimate
  io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised while validating experiment specs; carries the JSON path of the
/// offending field.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& message)
      : Error(ErrorKind::input, field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) throw Error(kind, message);
}

}  // namespace rotdiv
