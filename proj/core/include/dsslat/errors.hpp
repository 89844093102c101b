#pragma once

#include <stdexcept>
#include <string>

namespace dsslat {

// Invalid model or solver parameters. Messages name the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Offered load is at or above capacity; no stationary regime exists.
class UnstableError : public std::runtime_error {
 public:
  UnstableError(const std::string& what, double rho)
      : std::runtime_error(what), rho_(rho) {}
  double rho() const { return rho_; }

 private:
  double rho_;
};

// A numerical routine ran out of grid before its result settled.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace dsslat
