#pragma once

#include <stdexcept>
#include <string>

namespace pfa {

// Base class for all errors raised by the library. Construction-time
// validation failures and precondition violations throw; iterative solvers
// never throw on slow convergence, they return flagged estimates instead.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class NotAGroupError : public Error {
 public:
  NotAGroupError(const std::string& what, int a, int b, int c)
      : Error(what), a_(a), b_(b), c_(c) {}
  // First violating triple (meaning depends on which axiom failed).
  int a() const { return a_; }
  int b() const { return b_; }
  int c() const { return c_; }

 private:
  int a_, b_, c_;
};

class GroupMismatchError : public Error {
 public:
  using Error::Error;
};

class SpaceMismatchError : public Error {
 public:
  using Error::Error;
};

class ExponentMismatchError : public Error {
 public:
  using Error::Error;
};

class ShapeMismatchError : public Error {
 public:
  using Error::Error;
};

class ZeroVectorError : public Error {
 public:
  using Error::Error;
};

class DimensionTooLargeError : public Error {
 public:
  using Error::Error;
};

class NotAbelianError : public Error {
 public:
  using Error::Error;
};

class NotARepresentationError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ReplayMismatchError : public Error {
 public:
  using Error::Error;
};

class WitnessMissingError : public Error {
 public:
  using Error::Error;
};

}  // namespace pfa
