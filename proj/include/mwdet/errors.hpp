#pragma once

#include <stdexcept>
#include <string>

namespace mwdet {

// Malformed or inconsistent configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The adaptive integrator could not proceed; carries the time of failure.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t_fail)
      : std::runtime_error(what + " (at t = " + std::to_string(t_fail) + " s)"),
        t_fail_(t_fail) {}

  double time_of_failure() const { return t_fail_; }

 private:
  double t_fail_;
};

// A documented operation precondition was violated by the caller.
class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mwdet
