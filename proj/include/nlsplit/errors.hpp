#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

namespace nlsplit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates a structural or admissibility constraint.
class ConstraintError : public Error {
 public:
  ConstraintError(std::string key, const std::string& reason)
      : Error(key + ": " + reason), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A time step produced NaN or Inf.
class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(std::int64_t step, double tau = 0.0)
      : Error(describe(step, tau)), step_(step), tau_(tau) {}
  std::int64_t step() const { return step_; }
  /// Step size of the run that failed; 0 when unknown.
  double tau() const { return tau_; }

 private:
  static std::string describe(std::int64_t step, double tau) {
    std::ostringstream os;
    os << "non-finite value after step " << step;
    if (tau > 0) os << " (tau=" << tau << ")";
    return os.str();
  }

  std::int64_t step_;
  double tau_;
};

/// Mass reached the boundary band of the periodic box.
class BoundaryLeakError : public Error {
 public:
  BoundaryLeakError(double time, double fraction, double tau = 0.0)
      : Error(describe(time, fraction, tau)), time_(time), fraction_(fraction), tau_(tau) {}
  double time() const { return time_; }
  double fraction() const { return fraction_; }
  double tau() const { return tau_; }

 private:
  static std::string describe(double time, double fraction, double tau) {
    std::ostringstream os;
    os << "boundary mass fraction " << fraction << " at t=" << time;
    if (tau > 0) os << " (tau=" << tau << ")";
    return os.str();
  }

  double time_;
  double fraction_;
  double tau_;
};

/// The lattice cannot resolve the chirp exp(-i|x|^2/2t).
class ChirpUnderresolvedError : public Error {
 public:
  using Error::Error;
};

class DegenerateDenominatorError : public Error {
 public:
  using Error::Error;
};

class UnknownKindError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlsplit
