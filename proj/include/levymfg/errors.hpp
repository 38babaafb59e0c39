#pragma once

#include <stdexcept>
#include <string>

namespace levymfg {

// Bad inputs: rejected configs, violated preconditions. CLI exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at runtime: unresolvable CFL, NaN/overflow. CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Iteration budget exhausted without meeting the tolerance. CLI exit code 4.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace levymfg
