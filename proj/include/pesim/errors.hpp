#pragma once

#include <stdexcept>
#include <string>

namespace pesim {

// Base for every failure raised by the simulation stack.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model validation failures detected before integrating.
class HypothesisViolation : public Error {
 public:
  enum class Kind {
    kernel_not_lipschitz,     // no finite Lipschitz bound for the kernel
    kernel_min_not_positive,  // kernel minimum over the initial range is <= 0
  };

  HypothesisViolation(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class DegenerateInput : public Error {
  using Error::Error;
};

// A non-finite coordinate entered the dynamics; carries the time of first occurrence.
class NonFiniteState : public Error {
 public:
  NonFiniteState(double t, const std::string& what) : Error(what), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

class InvalidInterval : public Error {
  using Error::Error;
};

// A schedule failed its sliding-window integral check; carries the witness window start.
class PEViolated : public Error {
 public:
  PEViolated(double witness_t, double window_integral, const std::string& what)
      : Error(what), witness_t_(witness_t), window_integral_(window_integral) {}
  double witness_t() const { return witness_t_; }
  double window_integral() const { return window_integral_; }

 private:
  double witness_t_;
  double window_integral_;
};

class GenerationFailed : public Error {
  using Error::Error;
};

class InternalVerificationFailure : public Error {
  using Error::Error;
};

class InvariantBreach : public Error {
  using Error::Error;
};

class PreconditionFailed : public Error {
  using Error::Error;
};

class ZeroDirection : public Error {
  using Error::Error;
};

class DimensionMismatch : public Error {
  using Error::Error;
};

class EmptyAggregate : public Error {
  using Error::Error;
};

class DegenerateFit : public Error {
  using Error::Error;
};

// Config file problems; carries a 1-based line number when known (0 otherwise).
class ConfigError : public Error {
 public:
  ConfigError(int line, const std::string& what) : Error(what), line_(line) {}
  explicit ConfigError(const std::string& what) : Error(what), line_(0) {}
  int line() const { return line_; }

 private:
  int line_;
};

}  // namespace pesim
