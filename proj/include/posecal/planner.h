#ifndef POSECAL_PLANNER_H_
#define POSECAL_PLANNER_H_

// Selection of calibration plans: multi-start Nelder-Mead over the flattened
// plan variables, plus an exhaustive grid search used as a brute-force
// reference for small plans.

#include <array>
#include <cstdint>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "posecal/manip.h"
#include "posecal/measures.h"
#include "posecal/obsmodel.h"

namespace posecal {

// How calibration loads are chosen. kFixed applies `fixed_wrench` in every
// experiment; kFreeDirection adds one force-direction angle per experiment at
// `force_magnitude`.
enum class ForceMode { kFixed, kFreeDirection };

struct AngleInterval {
  double lo = -std::numbers::pi;
  double hi = std::numbers::pi;

  // Intervals spanning a full turn are treated as periodic.
  bool is_full_turn() const;
};

struct DesignSpace {
  int experiments = 1;
  std::array<AngleInterval, PlanarArmModel::kJoints> joint_bounds{};
  ForceMode force_mode = ForceMode::kFixed;
  Wrench fixed_wrench = Wrench::of(0.0, 100.0);
  double force_magnitude = 100.0;  // N, kFreeDirection only

  // Throws std::invalid_argument on m < 1, empty or out-of-range bounds.
  void validate() const;
  // Search variables per experiment: (q1, q2) or (q1, q2, force angle). The
  // geometric case never carries a force variable.
  int variables_per_experiment(CalibCase c) const;
};

struct OptimizerConfig {
  int restarts = 24;
  int max_iterations = 20000;  // objective evaluations per local search
  double tolerance = 1e-10;    // on log(objective)
  std::uint64_t seed = 1;
  int threads = 1;  // 0 selects hardware concurrency

  void validate() const;
};

struct PlanResult {
  Plan plan;
  double objective = 0.0;  // criterion value, re-evaluated on `plan`
  Criterion criterion = Criterion::kEtaMinMax;
  std::vector<double> restart_best;  // NaN where a restart found nothing
  long evaluations = 0;
  double wall_seconds = 0.0;
};

// Criterion value of a plan (eta in mm^2, det, or sigma_min). Returns nullopt
// when the plan does not identify every parameter.
std::optional<double> evaluate_criterion(CalibCase c,
                                         const PlanarArmModel& model,
                                         const Plan& plan, Criterion criterion,
                                         const std::optional<TestPoseSet>& tests,
                                         const NoiseSpec& noise);

// Maps a flat search vector to a plan: wraps periodic angles, clamps bounded
// ones.
Plan decode_plan(CalibCase c, const DesignSpace& space,
                 const Eigen::VectorXd& x);

// kEtaSingle requires exactly one test pose; both eta criteria require
// `tests`. Throws NoFeasiblePlan if no restart finds an identifiable plan.
PlanResult optimize_plan(CalibCase c, const PlanarArmModel& model,
                         const DesignSpace& space, Criterion criterion,
                         const std::optional<TestPoseSet>& tests,
                         const NoiseSpec& noise, const OptimizerConfig& cfg);

inline constexpr long kDefaultGridBudget = 100'000'000;

// Evaluates every point of a grid with `resolution` samples per search
// variable. Periodic variables use lo + i*(hi-lo)/resolution; bounded ones
// include both endpoints (only lo when resolution is 1). Throws BudgetExceeded
// when resolution^variables exceeds `max_evaluations`, NoFeasiblePlan when no
// grid point is identifiable.
PlanResult exhaustive_grid(CalibCase c, const PlanarArmModel& model,
                           const DesignSpace& space, Criterion criterion,
                           const std::optional<TestPoseSet>& tests,
                           const NoiseSpec& noise, int resolution,
                           long max_evaluations = kDefaultGridBudget);

}  // namespace posecal

#endif  // POSECAL_PLANNER_H_
