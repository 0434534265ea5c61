#ifndef POSECAL_NELDER_MEAD_H_
#define POSECAL_NELDER_MEAD_H_

#include <functional>

#include <Eigen/Core>

namespace posecal {

struct NelderMeadOptions {
  int max_evaluations = 20000;
  // Converged when the simplex spans at most f_tolerance in value and
  // x_tolerance (infinity norm) around the best vertex.
  double f_tolerance = 1e-12;
  double x_tolerance = 1e-9;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Downhill simplex with dimension-adaptive coefficients (Gao & Han, 2012).
// The objective may return +infinity for infeasible points; such vertices are
// always ranked worst. `steps` gives the initial simplex edge per coordinate.
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, const Eigen::VectorXd& steps,
    const NelderMeadOptions& options = {});

}  // namespace posecal

#endif  // POSECAL_NELDER_MEAD_H_
