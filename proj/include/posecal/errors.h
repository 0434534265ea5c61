#ifndef POSECAL_ERRORS_H_
#define POSECAL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace posecal {

// Base of every error raised by the library. Callers that only need to
// report a failure can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inverse kinematics target outside the reachable annulus.
class UnreachableTarget : public Error {
 public:
  UnreachableTarget(double x, double y, const std::string& what)
      : Error(what), x_(x), y_(y) {}
  double x() const { return x_; }
  double y() const { return y_; }

 private:
  double x_;
  double y_;
};

// Information matrix rank below the parameter dimension: the plan does not
// identify all parameters.
class SingularInformation : public Error {
 public:
  SingularInformation(int rank, int dimension, const std::string& what)
      : Error(what), rank_(rank), dimension_(dimension) {}
  int rank() const { return rank_; }
  int dimension() const { return dimension_; }

 private:
  int rank_;
  int dimension_;
};

// Every candidate visited by a plan search was unidentifiable.
class NoFeasiblePlan : public Error {
 public:
  using Error::Error;
};

// Exhaustive search would exceed its evaluation budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent scenario / plan input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Reports being compared do not describe the same scenario geometry.
class ScenarioMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace posecal

#endif  // POSECAL_ERRORS_H_
