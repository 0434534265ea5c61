#ifndef POSECAL_TESTS_TEST_UTIL_H_
#define POSECAL_TESTS_TEST_UTIL_H_

#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "posecal/manip.h"
#include "posecal/obsmodel.h"

namespace posecal::testing {

inline const PlanarArmModel kArm(600.0, 400.0);
inline const Wrench kCuttingForce = Wrench::of(0.0, 100.0);

inline JointConfig random_config(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  const double q1 = angle(gen);
  return JointConfig(q1, angle(gen));
}

inline Wrench random_wrench(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> f(-150.0, 150.0);
  const double fx = f(gen);
  return Wrench::of(fx, f(gen));
}

// Random plan; `fixed_force` applies the cutting force everywhere.
inline Plan random_plan(std::mt19937_64& gen, int m, bool fixed_force = false) {
  std::vector<Experiment> ex;
  for (int i = 0; i < m; ++i) {
    const JointConfig q = random_config(gen);
    ex.push_back({q, fixed_force ? kCuttingForce : random_wrench(gen)});
  }
  return Plan(std::move(ex));
}

inline double relative_error(const Eigen::MatrixXd& a,
                             const Eigen::MatrixXd& b) {
  return (a - b).norm() / b.norm();
}

inline double relative_error(double a, double b) {
  return std::abs(a - b) / std::abs(b);
}

}  // namespace posecal::testing

#endif  // POSECAL_TESTS_TEST_UTIL_H_
