// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Runs the shipped machining-line scenario end to end.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Geometry>
#include <fmt/format.h>

#include "posecal/errors.h"
#include "posecal/manip.h"
#include "posecal/measures.h"
#include "posecal/obsmodel.h"
#include "posecal/planner.h"
#include "posecal/rng.h"
#include "posecal/run.h"
#include "posecal/scenario.h"
#include "posecal/simcal.h"

namespace fs = std::filesystem;
using namespace posecal;

namespace {

const std::string kSource = POSECAL_SOURCE_DIR;
constexpr double kPi = std::numbers::pi;

int failures = 0;

void report(const char* id, bool pass, const std::string& detail) {
  fmt::print("{} {}: {}\n", pass ? "PASS" : "FAIL", id, detail);
  std::fflush(stdout);
  if (!pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double max_rms(const RunReport& r, Criterion c, int m) {
  for (const CriterionRun& run : r.runs) {
    if (run.criterion == c && run.experiments == m) return run.profile.rms_max();
  }
  throw std::logic_error("missing run");
}

const CriterionRun& find_run(const RunReport& r, Criterion c, int m) {
  for (const CriterionRun& run : r.runs) {
    if (run.criterion == c && run.experiments == m) return run;
  }
  throw std::logic_error("missing run");
}

// Reference maxima for one experiment count, ordered svd, d-opt, test-pose.
void check_table(const char* id, const RunReport& r, int m,
                 const double (&target)[3]) {
  const Criterion crit[] = {Criterion::kSvdObservability,
                            Criterion::kDOptimality, Criterion::kEtaMinMax};
  double got[3];
  bool within = true;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    got[i] = max_rms(r, crit[i], m);
    const double dev = got[i] / target[i] - 1.0;
    const bool ok = std::abs(dev) <= 0.15;
    within = within && ok;
    detail += fmt::format("{} {:.4f} vs {:.3f} ({:+.1f}%{}); ", to_string(crit[i]),
                          got[i], target[i], 100.0 * dev, ok ? "" : " out");
  }
  const bool ordered = got[2] < got[1] && got[1] < got[0];
  detail += fmt::format("ordering {}", ordered ? "holds" : "violated");
  report(id, within && ordered, detail);
}

void check_factors(const RunReport& r, const Scenario& s,
                   const TestPoseSet& tests) {
  const double factor = max_rms(r, Criterion::kEtaMinMax, 1) /
                        max_rms(r, Criterion::kEtaMinMax, 5);
  const double target = 0.137 / 0.055;
  const bool factor_ok = std::abs(factor / target - 1.0) <= 0.15;

  const Plan& best1 = find_run(r, Criterion::kEtaMinMax, 1).design.plan;
  const double single =
      eta_minmax(s.calib_case, s.model(), best1, tests, s.noise()).rms_max();
  const double repeated =
      eta_minmax(s.calib_case, s.model(), best1.repeated(5), tests, s.noise())
          .rms_max();
  const double ratio_err = std::abs(single / repeated / std::sqrt(5.0) - 1.0);
  const bool sqrt5_ok = ratio_err <= 1e-12;
  report("AC3", factor_ok && sqrt5_ok,
         fmt::format("m=1 -> m=5 factor {:.3f} vs {:.3f}; five repeats of the "
                     "m=1 plan improve by {:.15f} (sqrt 5 rel. err {:.1e})",
                     factor, target, single / repeated, ratio_err));
}

void check_monte_carlo(const Scenario& s, const TestPoseSet& tests) {
  const auto t0 = std::chrono::steady_clock::now();
  const int sizes[] = {2, 3, 5};
  double worst_eta = 0.0, worst_cov = 0.0;
  for (int i = 0; i < 3; ++i) {
    CounterRng rng(20120901, i);
    std::vector<Experiment> ex;
    for (int k = 0; k < sizes[i]; ++k) {
      const double q1 = rng.uniform(-kPi, kPi);
      const double q2 = rng.uniform(-kPi, kPi);
      ex.push_back({JointConfig(q1, q2), s.trajectory.wrench});
    }
    const Plan plan(std::move(ex));
    const TrialStats stats = run_monte_carlo(
        s.calib_case, s.model(), s.ground_truth(), plan, tests, s.noise(),
        {.trials = 10000, .seed = 100u + i, .threads = 0});
    const Covariance cov = covariance(
        information_matrix(s.calib_case, s.model(), plan), s.noise());
    const MeasureReport eta =
        eta_minmax(s.calib_case, s.model(), cov.matrix, tests);
    for (int j = 0; j < tests.size(); ++j) {
      worst_eta = std::max(worst_eta, std::abs(stats.mean_squared_error[j] /
                                                   eta.eta_per_pose[j] -
                                               1.0));
    }
    worst_cov = std::max(worst_cov, (stats.parameter_covariance - cov.matrix)
                                            .norm() /
                                        cov.matrix.norm());
  }
  const double secs = seconds_since(t0);
  report("AC4", worst_eta <= 0.05 && worst_cov <= 0.05 && secs < 60.0,
         fmt::format("3 random plans x {} nodes, 1e4 trials: worst eta dev "
                     "{:.2f}%, worst covariance dev {:.2f}% (Frobenius), {:.1f} s",
                     tests.size(), 100.0 * worst_eta, 100.0 * worst_cov, secs));
}

void check_grid(const RunReport& r, const Scenario& s,
                const TestPoseSet& tests) {
  std::string detail;
  bool ok = true;
  for (Criterion c : s.criteria) {
    const PlanResult grid =
        exhaustive_grid(s.calib_case, s.model(), s.design_space(1), c, tests,
                        s.noise(), 720);
    const double opt = find_run(r, c, 1).design.objective;
    // Positive gap means the grid beat the search.
    const double gap = is_maximized(c) ? grid.objective / opt - 1.0
                                       : 1.0 - grid.objective / opt;
    ok = ok && gap <= 0.01;
    detail += fmt::format("{} search {:.6e} grid {:.6e} ({:+.3f}%); ",
                          to_string(c), opt, grid.objective, -100.0 * gap);
  }
  detail += "grid step 0.5 deg";
  report("AC5", ok, detail);
}

// Fast checks of the model identities, each returning whether it holds.
std::vector<std::pair<std::string, std::function<bool()>>> properties() {
  const PlanarArmModel arm(600.0, 400.0);
  const Wrench load = Wrench::of(0.0, 100.0);
  auto random_plan = [](std::uint64_t stream, int m, bool fixed) {
    CounterRng rng(77, stream);
    std::vector<Experiment> ex;
    for (int k = 0; k < m; ++k) {
      const double q1 = rng.uniform(-kPi, kPi);
      const double q2 = rng.uniform(-kPi, kPi);
      const double fx = rng.uniform(-150, 150);
      const double fy = rng.uniform(-150, 150);
      ex.push_back({JointConfig(q1, q2),
                    fixed ? Wrench::of(0, 100) : Wrench::of(fx, fy)});
    }
    return Plan(std::move(ex));
  };
  const TestPoseSet tests =
      segment_trajectory(arm, Vec2(-600, 400), Vec2(600, 400), 25, load);
  const NoiseSpec noise(0.1);
  const CalibCase es = CalibCase::kElastoStatic;

  return {
      {"A-matrix identity",
       [=] {
         for (int t = 0; t < 200; ++t) {
           const Experiment e = random_plan(t, 1, false)[0];
           const Vec2 k(1e-5 * (1 + t % 3), 2e-5);
           const Mat2 jj = jacobian(arm, e.q);
           const Vec2 direct = jj * k.asDiagonal() * jj.transpose() * e.f.force;
           const Vec2 via_a = amatrix(arm, e.q, e.f) * k;
           if ((direct - via_a).norm() > 1e-12 * (1.0 + direct.norm())) return false;
         }
         return true;
       }},
      {"Jacobian vs finite differences",
       [=] {
         for (int t = 0; t < 200; ++t) {
           const JointConfig q = random_plan(t, 1, true)[0].q;
           const Mat2 j = jacobian(arm, q);
           for (int i = 0; i < 2; ++i) {
             const double h = 1e-6;
             Vec2 dq = Vec2::Zero();
             dq(i) = h;
             const Vec2 fd =
                 (forward_kinematics(arm, JointConfig(q.q1() + dq(0), q.q2() + dq(1))) -
                  forward_kinematics(arm, JointConfig(q.q1() - dq(0), q.q2() - dq(1)))) /
                 (2 * h);
             if ((fd - j.col(i)).norm() > 1e-6 * (1.0 + fd.norm())) return false;
           }
         }
         return true;
       }},
      {"information additivity",
       [=] {
         const Plan a = random_plan(1, 3, false), b = random_plan(2, 4, false);
         const Eigen::MatrixXd sum =
             (information_matrix(CalibCase::kCombined, arm, a) +
              information_matrix(CalibCase::kCombined, arm, b))
                 .matrix();
         const Eigen::MatrixXd joint =
             information_matrix(CalibCase::kCombined, arm, a.concatenated(b))
                 .matrix();
         return (sum - joint).norm() <= 1e-12 * joint.norm();
       }},
      {"repetition scaling eta*r constant",
       [=] {
         const Plan p = random_plan(3, 2, true);
         const double base = eta_minmax(es, arm, p, tests, noise).eta_max;
         for (int r = 2; r <= 6; ++r) {
           const double v = eta_minmax(es, arm, p.repeated(r), tests, noise).eta_max;
           if (std::abs(v * r / base - 1.0) > 1e-12) return false;
         }
         return true;
       }},
      {"force scaling eta ~ (beta/alpha)^2",
       [=] {
         const Plan p = random_plan(4, 3, false);
         std::vector<Experiment> scaled;
         for (int i = 0; i < p.size(); ++i) {
           scaled.push_back({p[i].q, Wrench{p[i].f.force * 3.0}});
         }
         std::vector<TestPose> t2;
         for (int j = 0; j < tests.size(); ++j) {
           t2.push_back({tests[j].q0, Wrench{tests[j].f0.force * 2.0}});
         }
         const double a = eta_minmax(es, arm, p, tests, noise).eta_max;
         const double b =
             eta_minmax(es, arm, Plan(scaled), TestPoseSet(t2), noise).eta_max;
         return std::abs(b / a - 4.0 / 9.0) <= 1e-12;
       }},
      {"monotone under added experiments",
       [=] {
         Plan p = random_plan(5, 2, true);
         double prev = eta_minmax(es, arm, p, tests, noise).eta_max;
         for (int k = 0; k < 10; ++k) {
           p = p.with(random_plan(100 + k, 1, true)[0]);
           const double v = eta_minmax(es, arm, p, tests, noise).eta_max;
           if (v > prev * (1.0 + 1e-12)) return false;
           prev = v;
         }
         return true;
       }},
      {"frame rotation invariance",
       [=] {
         const Plan p = random_plan(6, 3, false);
         const double phi = 0.7;
         const Eigen::Matrix2d rot = Eigen::Rotation2Dd(phi).toRotationMatrix();
         std::vector<Experiment> ex;
         for (int i = 0; i < p.size(); ++i) {
           ex.push_back({JointConfig(p[i].q.q1() + phi, p[i].q.q2()),
                         Wrench{rot * p[i].f.force}});
         }
         const Eigen::MatrixXd a =
             information_matrix(CalibCase::kCombined, arm, p).matrix();
         const Eigen::MatrixXd b =
             information_matrix(CalibCase::kCombined, arm, Plan(ex)).matrix();
         return (a - b).norm() <= 1e-10 * a.norm();
       }},
      {"bit-identical reruns",
       [=] {
         OptimizerConfig cfg;
         cfg.restarts = 4;
         cfg.seed = 3;
         DesignSpace space;
         space.experiments = 2;
         const PlanResult a = optimize_plan(es, arm, space, Criterion::kEtaMinMax,
                                            tests, noise, cfg);
         cfg.threads = 2;
         const PlanResult b = optimize_plan(es, arm, space, Criterion::kEtaMinMax,
                                            tests, noise, cfg);
         return a.plan == b.plan && a.objective == b.objective;
       }},
      {"geometric m=1 infeasible",
       [=] {
         const Plan p = random_plan(7, 1, false);
         if (identifiable_rank(information_matrix(CalibCase::kGeometric, arm, p)) >=
             4) {
           return false;
         }
         DesignSpace space;
         OptimizerConfig cfg;
         cfg.restarts = 2;
         try {
           optimize_plan(CalibCase::kGeometric, arm, space,
                         Criterion::kDOptimality, std::nullopt, noise, cfg);
         } catch (const NoFeasiblePlan&) {
           return true;
         }
         return false;
       }},
  };
}

void check_properties() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::string> broken;
  int count = 0;
  for (const auto& [name, check] : properties()) {
    ++count;
    bool ok = false;
    try {
      ok = check();
    } catch (const std::exception& e) {
      broken.push_back(fmt::format("{} ({})", name, e.what()));
      continue;
    }
    if (!ok) broken.push_back(name);
  }
  const double secs = seconds_since(t0);
  std::string detail = fmt::format("{}/{} properties hold in {:.2f} s", count -
                                   static_cast<int>(broken.size()), count, secs);
  for (const std::string& b : broken) detail += "; broken: " + b;
  report("AC6", broken.empty() && secs < 10.0, detail);
}

void check_golden(const RunReport& first, const Scenario& shipped) {
  const fs::path base = fs::temp_directory_path() /
                        fmt::format("posecal-acceptance-{}", ::getpid());
  write_outputs(first, base / "a");
  write_outputs(run_scenario(shipped), base / "b");
  std::string detail;
  bool ok = true;
  for (const char* name : {"summary.csv", "profile.csv"}) {
    const std::string golden = slurp(kSource + "/tests/golden/" + name);
    const std::string a = slurp(base / "a" / name);
    const std::string b = slurp(base / "b" / name);
    const bool same = !golden.empty() && a == golden && b == golden;
    ok = ok && same;
    detail += fmt::format("{} {}; ", name,
                          same ? "byte-identical to golden on two runs"
                               : "DIFFERS");
  }
  fs::remove_all(base);
  detail += fmt::format("seed {}", shipped.optimizer.seed);
  report("AC7", ok, detail);
}

}  // namespace

int main() {
  try {
    const Scenario shipped =
        load_scenario(kSource + "/scenarios/two_link_line.json");
    const TestPoseSet tests = scenario_test_poses(shipped);

    const auto t0 = std::chrono::steady_clock::now();
    const RunReport r = run_scenario(shipped);
    fmt::print("shipped scenario reproduced in {:.1f} s\n", seconds_since(t0));

    check_table("AC1", r, 1, {0.240, 0.170, 0.137});
    check_table("AC2", r, 5, {0.121, 0.069, 0.055});
    check_factors(r, shipped, tests);
    check_monte_carlo(shipped, tests);
    check_grid(r, shipped, tests);
    check_properties();
    check_golden(r, shipped);
  } catch (const std::exception& e) {
    fmt::print("FAIL acceptance aborted: {}\n", e.what());
    return 2;
  }
  fmt::print("{} criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
