#pragma once

#include <stdexcept>
#include <string>

namespace sar2rgb {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied value violates a documented precondition or invariant.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A file exists but its content cannot be decoded.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Filesystem-level failure: missing, unreadable or unwritable paths.
class IoError : public Error {
 public:
  using Error::Error;
};

// Training produced a NaN or infinite loss.
class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(long long step, const std::string& what)
      : Error("non-finite " + what + " at step " + std::to_string(step)), step_(step) {}
  long long step() const noexcept { return step_; }

 private:
  long long step_;
};

}  // namespace sar2rgb
