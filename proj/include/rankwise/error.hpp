#pragma once

#include <stdexcept>
#include <string>

namespace rankwise {

// Every failure surfaced to a caller belongs to one of these categories; the
// CLI maps them to exit codes and the service to HTTP statuses.
enum class ErrorCategory {
  Validation,  // bad input: exit 1, HTTP 400
  NotFound,    // unknown id: exit 1, HTTP 404
  Conflict,    // duplicate id or submission: exit 1, HTTP 409
  Locked,      // store owned by another writer: exit 2, HTTP 423
  Io,          // filesystem or archive failure: exit 2, HTTP 500
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string message, std::string field = {})
      : std::runtime_error(std::move(message)), category_(category), field_(std::move(field)) {}

  ErrorCategory category() const noexcept { return category_; }
  // Name of the offending input field or component, when one applies.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCategory category_;
  std::string field_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::string message, std::string field = {})
      : Error(ErrorCategory::Validation, std::move(message), std::move(field)) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(std::string message, std::string field = {})
      : Error(ErrorCategory::NotFound, std::move(message), std::move(field)) {}
};

class DuplicateError : public Error {
 public:
  explicit DuplicateError(std::string message, std::string field = {})
      : Error(ErrorCategory::Conflict, std::move(message), std::move(field)) {}
};

class StoreLockedError : public Error {
 public:
  explicit StoreLockedError(std::string message) : Error(ErrorCategory::Locked, std::move(message)) {}
};

class IoError : public Error {
 public:
  explicit IoError(std::string message) : Error(ErrorCategory::Io, std::move(message)) {}
};

}  // namespace rankwise
