#pragma once

#include <stdexcept>
#include <string>

namespace commbench {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or parameter constraint was violated by the caller.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A numerical stage could not produce a trustworthy result (under-resolved
/// truncation, no admissible shift found, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}

}  // namespace detail
}  // namespace commbench
