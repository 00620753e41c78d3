// statejar: lightweight success-or-error return type used by all parsers.
#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <variant>

namespace statejar {

// Machine-readable failure classes. The CLI prints these names verbatim,
// so they are part of the tool's stable output.
enum class ErrorClass {
  MissingNameValue,
  InvalidName,
  InvalidValue,
  MalformedQuotedString,
  BadDate,
  BadAttributeValue,
  ConflictingAttribute,
  BadVersion,
  DollarName,
  OrphanDollarAttribute,
  BareToken,
  MalformedLine,
  BadScript,
};

inline const char* to_string(ErrorClass c) {
  switch (c) {
    case ErrorClass::MissingNameValue: return "MissingNameValue";
    case ErrorClass::InvalidName: return "InvalidName";
    case ErrorClass::InvalidValue: return "InvalidValue";
    case ErrorClass::MalformedQuotedString: return "MalformedQuotedString";
    case ErrorClass::BadDate: return "BadDate";
    case ErrorClass::BadAttributeValue: return "BadAttributeValue";
    case ErrorClass::ConflictingAttribute: return "ConflictingAttribute";
    case ErrorClass::BadVersion: return "BadVersion";
    case ErrorClass::DollarName: return "DollarName";
    case ErrorClass::OrphanDollarAttribute: return "OrphanDollarAttribute";
    case ErrorClass::BareToken: return "BareToken";
    case ErrorClass::MalformedLine: return "MalformedLine";
    case ErrorClass::BadScript: return "BadScript";
  }
  return "Unknown";
}

struct Error {
  ErrorClass cls;
  std::string message;
  // Line number for file-shaped inputs, 0 when not applicable.
  std::size_t line = 0;
};

template <typename T>
class Result {
 public:
  Result(T value) : v_(std::move(value)) {}
  Result(Error error) : v_(std::move(error)) {}

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }

  const T& value() const& { return std::get<T>(v_); }
  T& value() & { return std::get<T>(v_); }
  T&& value() && { return std::get<T>(std::move(v_)); }

  const Error& error() const { return std::get<Error>(v_); }

 private:
  std::variant<T, Error> v_;
};

inline Error make_error(ErrorClass cls, std::string message, std::size_t line = 0) {
  return Error{cls, std::move(message), line};
}

template <typename T>
Result<T> make_error(ErrorClass cls, std::string message, std::size_t line = 0) {
  return Result<T>(Error{cls, std::move(message), line});
}

}  // namespace statejar
