#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pta {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user input: dimensions, tolerances, unknown keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a broken numerical routine.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

class NormalizationUndefined : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::vector<double> last_means, std::size_t samples)
      : Error(what), last_means(std::move(last_means)), samples(samples) {}
  std::vector<double> last_means;
  std::size_t samples;
};

}  // namespace pta
