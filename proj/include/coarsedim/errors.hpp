#pragma once

#include <stdexcept>
#include <string>

namespace coarsedim {

// Base of every error raised by the library. Failed verdicts are reported as
// data; these are reserved for inputs or states the pipeline cannot continue
// from.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class IncompatibleOperands : public Error {
 public:
  using Error::Error;
};

class SizeLimitExceeded : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class InvalidSpace : public Error {
 public:
  using Error::Error;
};

class FactorizationInvalid : public Error {
 public:
  using Error::Error;
};

class InvalidFunction : public Error {
 public:
  using Error::Error;
};

class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

// A point of the space is not reached by the construction at hand.
class CoverGap : public Error {
 public:
  CoverGap(const std::string& what, std::string point)
      : Error(what), point_(std::move(point)) {}
  const std::string& point() const { return point_; }

 private:
  std::string point_;
};

class AmbiguousSupport : public Error {
 public:
  using Error::Error;
};

class InvalidWitness : public Error {
 public:
  using Error::Error;
};

class FileError : public Error {
 public:
  using Error::Error;
};

}  // namespace coarsedim
