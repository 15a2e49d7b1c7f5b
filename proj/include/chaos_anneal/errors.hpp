#pragma once

#include <stdexcept>
#include <string>

namespace chaos_anneal {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside its allowed domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Scaling needs a non-zero coupling to be defined.
class ScalingUndefined : public Error {
 public:
  using Error::Error;
};

/// An integrator left the finite region; carries the last time with a valid state.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, double last_valid_time)
      : Error(what), last_valid_time_(last_valid_time) {}
  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// Time step too coarse for the current state.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

/// Requested Hilbert-space dimension exceeds the configured budget.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Operation called on inputs it does not support.
class MisuseError : public Error {
 public:
  using Error::Error;
};

/// Bad or incomplete run configuration; names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(key + ": " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace chaos_anneal
