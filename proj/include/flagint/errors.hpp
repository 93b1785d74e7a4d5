#pragma once

#include <stdexcept>
#include <string>

namespace flagint {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or incomplete exponent / run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Exponents outside the region an operation requires (e.g. alpha/n < beta/m).
class RegionError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Kernel evaluated on its singular set.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// A numerical result could not be resolved to the requested accuracy.
// Carries the best available estimate so callers can still report it.
class AccuracyError : public Error {
 public:
  AccuracyError(const std::string& what, double best_estimate, double error_estimate)
      : Error(what), best_(best_estimate), err_(error_estimate) {}

  double best_estimate() const noexcept { return best_; }
  double error_estimate() const noexcept { return err_; }

 private:
  double best_;
  double err_;
};

}  // namespace flagint
