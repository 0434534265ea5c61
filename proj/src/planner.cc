#include "posecal/planner.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "posecal/errors.h"
#include "posecal/nelder_mead.h"
#include "posecal/rng.h"
#include "parallel.h"

namespace posecal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Criterion evaluation with the test-pose observation matrices cached.
class CriterionEvaluator {
 public:
  CriterionEvaluator(CalibCase c, const PlanarArmModel& model,
                     Criterion criterion,
                     const std::optional<TestPoseSet>& tests,
                     const NoiseSpec& noise)
      : case_(c), model_(model), criterion_(criterion), noise_(noise) {
    if (needs_test_poses(criterion)) {
      if (!tests) {
        throw std::invalid_argument(fmt::format(
            "criterion {} needs test poses", to_string(criterion)));
      }
      if (criterion == Criterion::kEtaSingle && tests->size() != 1) {
        throw std::invalid_argument(
            "eta_single needs exactly one test pose; use eta_minmax for sets");
      }
      for (const TestPose& t : tests->poses()) {
        test_b_.push_back(build_b(c, model, t.q0, t.f0));
      }
    }
  }

  std::optional<double> value(const Plan& plan) const {
    const InfoMatrix info = information_matrix(case_, model_, plan);
    switch (criterion_) {
      case Criterion::kDOptimality: {
        const double d = d_optimality(info);
        return d > 0.0 ? std::optional(d) : std::nullopt;
      }
      case Criterion::kSvdObservability: {
        const double s = svd_observability(info);
        return s > 0.0 ? std::optional(s) : std::nullopt;
      }
      case Criterion::kEtaSingle:
      case Criterion::kEtaMinMax: {
        if (identifiable_rank(info) < info.dimension()) return std::nullopt;
        const Covariance cov = covariance(info, noise_);
        double worst = 0.0;
        for (const Eigen::MatrixXd& b0 : test_b_) {
          worst = std::max(worst, propagated_mean_square(b0, cov.matrix));
        }
        return worst;
      }
    }
    return std::nullopt;
  }

  // Monotone transform minimized by the search; +inf when infeasible.
  double cost(const Plan& plan) const {
    const std::optional<double> v = value(plan);
    if (!v) return kInf;
    if (is_maximized(criterion_)) return -std::log(*v);
    // eta can be exactly zero only for degenerate test poses (no load).
    return *v > 0.0 ? std::log(*v) : -kInf;
  }

 private:
  CalibCase case_;
  PlanarArmModel model_;
  Criterion criterion_;
  NoiseSpec noise_;
  std::vector<Eigen::MatrixXd> test_b_;
};

struct VariableRange {
  double lo;
  double hi;
  bool periodic;
};

std::vector<VariableRange> variable_ranges(CalibCase c,
                                           const DesignSpace& space) {
  std::vector<VariableRange> out;
  const int per = space.variables_per_experiment(c);
  for (int e = 0; e < space.experiments; ++e) {
    for (const AngleInterval& b : space.joint_bounds) {
      out.push_back({b.lo, b.hi, b.is_full_turn()});
    }
    if (per == 3) out.push_back({0.0, kTwoPi, true});
  }
  return out;
}

std::vector<double> flatten(const Plan& plan) {
  std::vector<double> v;
  for (const Experiment& e : plan.experiments()) {
    v.insert(v.end(), {e.q.q1(), e.q.q2(), e.f.force.x(), e.f.force.y()});
  }
  return v;
}

// True when `a` should replace `b` as the best candidate.
bool better(double cost_a, const Plan& a, double cost_b,
            const std::optional<Plan>& b) {
  if (!b) return true;
  if (cost_a != cost_b) return cost_a < cost_b;
  return flatten(a) < flatten(*b);
}

struct RestartOutcome {
  std::optional<Plan> plan;
  double cost = kInf;
  long evaluations = 0;
};

RestartOutcome run_restart(const CriterionEvaluator& eval, CalibCase c,
                           const DesignSpace& space,
                           const std::vector<VariableRange>& ranges,
                           const OptimizerConfig& cfg, int restart) {
  constexpr int kStartDraws = 500;
  constexpr int kPolishRounds = 6;
  CounterRng rng(cfg.seed, static_cast<std::uint64_t>(restart));
  const int n = static_cast<int>(ranges.size());
  RestartOutcome out;

  auto objective = [&](const Eigen::VectorXd& x) {
    ++out.evaluations;
    return eval.cost(decode_plan(c, space, x));
  };

  Eigen::VectorXd x(n);
  double fx = kInf;
  for (int draw = 0; draw < kStartDraws && fx == kInf; ++draw) {
    for (int i = 0; i < n; ++i) x(i) = rng.uniform(ranges[i].lo, ranges[i].hi);
    fx = objective(x);
  }
  if (fx == kInf) return out;

  Eigen::VectorXd steps(n);
  for (int i = 0; i < n; ++i) steps(i) = 0.25 * (ranges[i].hi - ranges[i].lo);

  NelderMeadOptions opts;
  opts.max_evaluations = cfg.max_iterations;
  opts.f_tolerance = cfg.tolerance;
  opts.x_tolerance = 1e-9;
  NelderMeadResult best = nelder_mead(objective, x, steps, opts);
  // Re-seeding the simplex around the incumbent recovers from premature
  // collapse along ridges.
  for (int round = 0; round < kPolishRounds; ++round) {
    NelderMeadResult next = nelder_mead(objective, best.x, 0.1 * steps, opts);
    const bool improved = next.value < best.value - cfg.tolerance;
    if (next.value < best.value) best = std::move(next);
    if (!improved) break;
  }
  out.plan = decode_plan(c, space, best.x);
  out.cost = eval.cost(*out.plan);
  return out;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace

bool AngleInterval::is_full_turn() const {
  return hi - lo >= kTwoPi * (1.0 - 1e-12);
}

void DesignSpace::validate() const {
  if (experiments < 1) {
    throw std::invalid_argument("design space needs at least one experiment");
  }
  for (const AngleInterval& b : joint_bounds) {
    if (!(b.lo < b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi)) {
      throw std::invalid_argument(
          fmt::format("empty joint interval [{}, {}]", b.lo, b.hi));
    }
    if (!b.is_full_turn() &&
        (b.lo < -std::numbers::pi || b.hi > std::numbers::pi)) {
      throw std::invalid_argument(fmt::format(
          "bounded joint interval [{}, {}] must lie within [-pi, pi]", b.lo,
          b.hi));
    }
  }
  if (force_mode == ForceMode::kFreeDirection &&
      !(force_magnitude > 0.0 && std::isfinite(force_magnitude))) {
    throw std::invalid_argument("free-direction force needs a magnitude > 0");
  }
}

int DesignSpace::variables_per_experiment(CalibCase c) const {
  if (c == CalibCase::kGeometric) return PlanarArmModel::kJoints;
  return force_mode == ForceMode::kFreeDirection ? PlanarArmModel::kJoints + 1
                                                 : PlanarArmModel::kJoints;
}

void OptimizerConfig::validate() const {
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (max_iterations < 1) {
    throw std::invalid_argument("max_iterations must be >= 1");
  }
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
}

std::optional<double> evaluate_criterion(CalibCase c,
                                         const PlanarArmModel& model,
                                         const Plan& plan, Criterion criterion,
                                         const std::optional<TestPoseSet>& tests,
                                         const NoiseSpec& noise) {
  return CriterionEvaluator(c, model, criterion, tests, noise).value(plan);
}

Plan decode_plan(CalibCase c, const DesignSpace& space,
                 const Eigen::VectorXd& x) {
  const int per = space.variables_per_experiment(c);
  if (x.size() != per * space.experiments) {
    throw std::invalid_argument(
        fmt::format("plan vector has {} entries, expected {}", x.size(),
                    per * space.experiments));
  }
  auto joint = [&](int j, double v) {
    const AngleInterval& b = space.joint_bounds[j];
    return b.is_full_turn() ? v : std::clamp(v, b.lo, b.hi);
  };
  std::vector<Experiment> experiments;
  experiments.reserve(space.experiments);
  for (int e = 0; e < space.experiments; ++e) {
    const int base = e * per;
    Experiment ex;
    ex.q = JointConfig(joint(0, x(base)), joint(1, x(base + 1)));
    if (c == CalibCase::kGeometric) {
      ex.f = Wrench::zero();
    } else if (space.force_mode == ForceMode::kFixed) {
      ex.f = space.fixed_wrench;
    } else {
      const double a = x(base + 2);
      ex.f = Wrench::of(space.force_magnitude * std::cos(a),
                        space.force_magnitude * std::sin(a));
    }
    experiments.push_back(ex);
  }
  return Plan(std::move(experiments));
}

PlanResult optimize_plan(CalibCase c, const PlanarArmModel& model,
                         const DesignSpace& space, Criterion criterion,
                         const std::optional<TestPoseSet>& tests,
                         const NoiseSpec& noise, const OptimizerConfig& cfg) {
  space.validate();
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const CriterionEvaluator eval(c, model, criterion, tests, noise);
  const std::vector<VariableRange> ranges = variable_ranges(c, space);

  std::vector<RestartOutcome> outcomes(cfg.restarts);
  internal::parallel_for(cfg.restarts, internal::resolve_threads(cfg.threads, cfg.restarts),
               [&](int r) {
                 outcomes[r] = run_restart(eval, c, space, ranges, cfg, r);
               });

  std::optional<Plan> best;
  double best_cost = kInf;
  std::vector<double> restart_best;
  long evaluations = 0;
  for (const RestartOutcome& o : outcomes) {
    evaluations += o.evaluations;
    if (!o.plan || o.cost == kInf) {
      restart_best.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    restart_best.push_back(*eval.value(*o.plan));
    if (better(o.cost, *o.plan, best_cost, best)) {
      best = o.plan;
      best_cost = o.cost;
    }
  }
  if (!best) {
    throw NoFeasiblePlan(fmt::format(
        "no identifiable {}-experiment plan found for the {} case ({} "
        "parameters)",
        space.experiments, to_string(c), parameter_dimension(c)));
  }
  PlanResult result{.plan = *best,
                    .objective = *eval.value(*best),
                    .criterion = criterion,
                    .restart_best = std::move(restart_best),
                    .evaluations = evaluations,
                    .wall_seconds = elapsed_since(t0)};
  return result;
}

PlanResult exhaustive_grid(CalibCase c, const PlanarArmModel& model,
                           const DesignSpace& space, Criterion criterion,
                           const std::optional<TestPoseSet>& tests,
                           const NoiseSpec& noise, int resolution,
                           long max_evaluations) {
  space.validate();
  if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");
  const auto t0 = std::chrono::steady_clock::now();
  const CriterionEvaluator eval(c, model, criterion, tests, noise);
  const std::vector<VariableRange> ranges = variable_ranges(c, space);
  const int n = static_cast<int>(ranges.size());

  double total = std::pow(static_cast<double>(resolution), n);
  if (total > static_cast<double>(max_evaluations)) {
    throw BudgetExceeded(fmt::format(
        "grid of {}^{} = {:.3g} points exceeds the budget of {} evaluations",
        resolution, n, total, max_evaluations));
  }

  std::vector<std::vector<double>> axes(n);
  for (int i = 0; i < n; ++i) {
    const VariableRange& r = ranges[i];
    for (int k = 0; k < resolution; ++k) {
      double v = r.lo;
      if (r.periodic) {
        v = r.lo + (r.hi - r.lo) * k / resolution;
      } else if (resolution > 1) {
        v = r.lo + (r.hi - r.lo) * k / (resolution - 1);
      }
      axes[i].push_back(v);
    }
  }

  std::vector<int> index(n, 0);
  Eigen::VectorXd x(n);
  std::optional<Plan> best;
  double best_cost = kInf;
  long evaluations = 0;
  while (true) {
    for (int i = 0; i < n; ++i) x(i) = axes[i][index[i]];
    const Plan plan = decode_plan(c, space, x);
    const double cost = eval.cost(plan);
    ++evaluations;
    if (cost < kInf && better(cost, plan, best_cost, best)) {
      best = plan;
      best_cost = cost;
    }
    int d = n - 1;
    while (d >= 0 && ++index[d] == resolution) index[d--] = 0;
    if (d < 0) break;
  }
  if (!best) {
    throw NoFeasiblePlan("no identifiable plan on the grid");
  }
  const double objective = *eval.value(*best);
  PlanResult result{.plan = *best,
                    .objective = objective,
                    .criterion = criterion,
                    .restart_best = {objective},
                    .evaluations = evaluations,
                    .wall_seconds = elapsed_since(t0)};
  return result;
}

}  // namespace posecal
