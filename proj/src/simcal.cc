#include "posecal/simcal.h"

#include <stdexcept>

#include <Eigen/QR>
#include <fmt/format.h>

#include "parallel.h"
#include "posecal/errors.h"

namespace posecal {

Eigen::VectorXd GroundTruth::parameters(CalibCase c) const {
  switch (c) {
    case CalibCase::kGeometric:
      return geom.as_vector();
    case CalibCase::kElastoStatic:
      return compliance.k;
    case CalibCase::kCombined: {
      Eigen::VectorXd x(6);
      x << geom.as_vector(), compliance.k;
      return x;
    }
  }
  throw std::invalid_argument("unknown calibration case");
}

GroundTruth default_ground_truth() {
  GroundTruth t;
  t.compliance.k = Vec2(1e-5, 2e-5);
  return t;
}

std::vector<Vec2> simulate_measurements(CalibCase c,
                                        const PlanarArmModel& model,
                                        const GroundTruth& truth,
                                        const Plan& plan, double sigma_mm,
                                        CounterRng& rng) {
  if (!(sigma_mm >= 0.0)) {
    throw std::invalid_argument("noise sigma must be >= 0");
  }
  const Eigen::VectorXd x = truth.parameters(c);
  std::vector<Vec2> out;
  out.reserve(plan.size());
  for (const Experiment& e : plan.experiments()) {
    Vec2 dp = build_b(c, model, e.q, e.f) * x;
    if (sigma_mm > 0.0) {
      const double ex = rng.normal();
      const double ey = rng.normal();
      dp += sigma_mm * Vec2(ex, ey);
    }
    out.push_back(dp);
  }
  return out;
}

std::vector<Vec2> simulate_measurements(CalibCase c,
                                        const PlanarArmModel& model,
                                        const GroundTruth& truth,
                                        const Plan& plan, double sigma_mm,
                                        std::uint64_t seed) {
  CounterRng rng(seed, 0);
  return simulate_measurements(c, model, truth, plan, sigma_mm, rng);
}

Eigen::VectorXd identify(CalibCase c, const PlanarArmModel& model,
                         const Plan& plan,
                         const std::vector<Vec2>& measurements) {
  if (static_cast<int>(measurements.size()) != plan.size()) {
    throw std::invalid_argument(
        fmt::format("{} measurements for a {}-experiment plan",
                    measurements.size(), plan.size()));
  }
  const int p = parameter_dimension(c);
  const InfoMatrix info = information_matrix(c, model, plan);
  const int rank = identifiable_rank(info);
  if (rank < p) {
    throw SingularInformation(
        rank, p,
        fmt::format("cannot identify {} parameters from a plan of rank {}", p,
                    rank));
  }
  Eigen::MatrixXd stacked(2 * plan.size(), p);
  Eigen::VectorXd rhs(2 * plan.size());
  for (int i = 0; i < plan.size(); ++i) {
    stacked.middleRows(2 * i, 2) = build_b(c, model, plan[i].q, plan[i].f);
    rhs.segment(2 * i, 2) = measurements[i];
  }
  // Column equilibration keeps QR accurate when parameter units differ.
  const Eigen::VectorXd scale = stacked.colwise().norm().transpose().unaryExpr(
      [](double n) { return n > 0.0 ? 1.0 / n : 1.0; });
  const Eigen::MatrixXd scaled = stacked * scale.asDiagonal();
  const Eigen::VectorXd y = scaled.colPivHouseholderQr().solve(rhs);
  return scale.asDiagonal() * y;
}

std::vector<double> compensate_and_score(CalibCase c,
                                         const PlanarArmModel& model,
                                         const GroundTruth& truth,
                                         const Eigen::VectorXd& estimate,
                                         const TestPoseSet& tests) {
  const Eigen::VectorXd error = estimate - truth.parameters(c);
  std::vector<double> out;
  out.reserve(tests.size());
  for (const TestPose& t : tests.poses()) {
    out.push_back((build_b(c, model, t.q0, t.f0) * error).squaredNorm());
  }
  return out;
}

TrialStats run_monte_carlo(CalibCase c, const PlanarArmModel& model,
                           const GroundTruth& truth, const Plan& plan,
                           const TestPoseSet& tests, const NoiseSpec& noise,
                           const MonteCarloOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("trials must be >= 1");
  const int p = parameter_dimension(c);
  const int s = tests.size();
  const int n = options.trials;

  // Fail before spawning work if the plan is unidentifiable.
  covariance(information_matrix(c, model, plan), noise);

  Eigen::MatrixXd estimates(p, n);
  Eigen::MatrixXd sq_errors(s, n);
  internal::parallel_for(
      n, internal::resolve_threads(options.threads, n), [&](int t) {
        CounterRng rng(options.seed, static_cast<std::uint64_t>(t));
        const std::vector<Vec2> dp =
            simulate_measurements(c, model, truth, plan, noise.sigma(), rng);
        const Eigen::VectorXd est = identify(c, model, plan, dp);
        estimates.col(t) = est;
        const std::vector<double> e =
            compensate_and_score(c, model, truth, est, tests);
        sq_errors.col(t) = Eigen::Map<const Eigen::VectorXd>(e.data(), s);
      });

  TrialStats stats;
  stats.trials = n;
  stats.mean_estimate = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd mse = Eigen::VectorXd::Zero(s);
  for (int t = 0; t < n; ++t) {
    stats.mean_estimate += estimates.col(t);
    mse += sq_errors.col(t);
  }
  stats.mean_estimate /= n;
  mse /= n;
  stats.mean_squared_error.assign(mse.data(), mse.data() + s);

  stats.parameter_covariance = Eigen::MatrixXd::Zero(p, p);
  if (n > 1) {
    for (int t = 0; t < n; ++t) {
      const Eigen::VectorXd d = estimates.col(t) - stats.mean_estimate;
      stats.parameter_covariance.noalias() += d * d.transpose();
    }
    stats.parameter_covariance /= (n - 1);
  }
  return stats;
}

}  // namespace posecal
