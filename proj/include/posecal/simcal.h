#ifndef POSECAL_SIMCAL_H_
#define POSECAL_SIMCAL_H_

// Monte Carlo simulation of the calibrate-then-compensate pipeline: noisy
// measurements from a ground-truth model, least-squares identification, and
// the residual end-effector error left after compensating with the estimate.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "posecal/manip.h"
#include "posecal/measures.h"
#include "posecal/obsmodel.h"
#include "posecal/rng.h"

namespace posecal {

struct GroundTruth {
  GeomParams geom;
  ComplianceParams compliance;

  // Parameter vector in the ordering of CalibCase.
  Eigen::VectorXd parameters(CalibCase c) const;
};

// Default true compliances for the two-link case study, rad/(N*mm).
GroundTruth default_ground_truth();

// dp_i = B_i * dX_true + e_i with e_i ~ N(0, sigma^2 I). sigma may be 0.
// Draws come from `rng` in experiment order, x before y.
std::vector<Vec2> simulate_measurements(CalibCase c,
                                        const PlanarArmModel& model,
                                        const GroundTruth& truth,
                                        const Plan& plan, double sigma_mm,
                                        CounterRng& rng);

// Uses stream 0 of `seed`.
std::vector<Vec2> simulate_measurements(CalibCase c,
                                        const PlanarArmModel& model,
                                        const GroundTruth& truth,
                                        const Plan& plan, double sigma_mm,
                                        std::uint64_t seed);

// Least-squares estimate of dX from the stacked system. Throws
// SingularInformation for unidentifiable plans.
Eigen::VectorXd identify(CalibCase c, const PlanarArmModel& model,
                         const Plan& plan,
                         const std::vector<Vec2>& measurements);

// Squared residual location error |B0_j * (estimate - truth)|^2 per test pose,
// mm^2.
std::vector<double> compensate_and_score(CalibCase c,
                                         const PlanarArmModel& model,
                                         const GroundTruth& truth,
                                         const Eigen::VectorXd& estimate,
                                         const TestPoseSet& tests);

struct TrialStats {
  int trials = 0;
  std::vector<double> mean_squared_error;  // per test pose, mm^2
  Eigen::VectorXd mean_estimate;
  Eigen::MatrixXd parameter_covariance;  // about the sample mean, n-1
};

struct MonteCarloOptions {
  int trials = 10000;
  std::uint64_t seed = 1;
  int threads = 1;  // 0 selects hardware concurrency
};

// Trial t draws its noise from CounterRng(seed, t); per-trial results are
// reduced in trial order, so the statistics do not depend on `threads`.
TrialStats run_monte_carlo(CalibCase c, const PlanarArmModel& model,
                           const GroundTruth& truth, const Plan& plan,
                           const TestPoseSet& tests, const NoiseSpec& noise,
                           const MonteCarloOptions& options);

}  // namespace posecal

#endif  // POSECAL_SIMCAL_H_
