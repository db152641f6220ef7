#pragma once

#include <stdexcept>
#include <string>

namespace rydberg {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: config files, defect files, invalid arguments. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class InvalidModelError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Numerical failures. Map to CLI exit code 3.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public NumericError {
 public:
  using NumericError::NumericError;
};

class SelectionRuleError : public Error {
 public:
  using Error::Error;
};

class DegenerateGapError : public NumericError {
 public:
  using NumericError::NumericError;
};

class StiffnessError : public NumericError {
 public:
  StiffnessError(const std::string& what, double tau) : NumericError(what), tau_(tau) {}
  double tau() const { return tau_; }

 private:
  double tau_;
};

class IntegratorRejectionError : public NumericError {
 public:
  using NumericError::NumericError;
};

class UnreachableTargetError : public NumericError {
 public:
  UnreachableTargetError(const std::string& what, double achievable)
      : NumericError(what), achievable_(achievable) {}
  double achievable() const { return achievable_; }

 private:
  double achievable_;
};

}  // namespace rydberg
