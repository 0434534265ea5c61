// posecal: calibration plan design for the planar two-link arm.
//
//   posecal design    --scenario S [--out DIR] [--seed N] [--criterion C]...
//   posecal evaluate  --scenario S --plan P [--out DIR]
//   posecal validate  --scenario S --plan P [--out DIR] [--trials N] [--seed N]
//   posecal reproduce --scenario S --out DIR [--seed N] [--trials N]
//                     [--no-monte-carlo]
//
// Exit codes: 0 success, 1 I/O or other failure, 2 configuration error,
// 3 infeasible design, 4 numerical failure (unidentifiable plan).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "posecal/errors.h"
#include "posecal/measures.h"
#include "posecal/run.h"
#include "posecal/scenario.h"
#include "posecal/simcal.h"

namespace {

using namespace posecal;

enum ExitCode {
  kOk = 0,
  kFailure = 1,
  kConfig = 2,
  kInfeasible = 3,
  kNumerical = 4,
};

struct Args {
  std::string scenario;
  std::string out;
  std::string plan;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::vector<std::string> criteria;
  bool no_monte_carlo = false;
};

std::vector<Criterion> parse_criteria(const std::vector<std::string>& names) {
  std::vector<Criterion> out;
  for (const std::string& n : names) {
    const auto c = parse_criterion(n);
    if (!c) throw ConfigError(fmt::format("unknown criterion '{}'", n));
    out.push_back(*c);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

int run_design(const Args& a) {
  RunOptions opts;
  opts.seed = a.seed;
  opts.monte_carlo = false;
  opts.only = parse_criteria(a.criteria);
  const RunReport report = run_scenario(load_scenario(a.scenario), opts);
  for (const CriterionRun& run : report.runs) {
    fmt::print("{:<18} m={}  max sqrt(eta) = {:.4f} mm  objective = {:.6e}\n",
               to_string(run.criterion), run.experiments,
               run.profile.rms_max(), run.design.objective);
  }
  if (!a.out.empty()) {
    const std::filesystem::path dir(a.out);
    write_text(dir / "summary.csv", summary_csv(report));
    write_text(dir / "profile.csv", profile_csv(report));
    for (const CriterionRun& run : report.runs) {
      write_text(dir / fmt::format("plan_{}_m{}.csv", to_string(run.criterion),
                                   run.experiments),
                 plan_csv(run.design.plan));
    }
  }
  return kOk;
}

int run_evaluate(const Args& a) {
  const Scenario s = load_scenario(a.scenario);
  const Plan plan = load_plan(a.plan);
  const PlanarArmModel model = s.model();
  const TestPoseSet tests = scenario_test_poses(s);
  const MeasureReport r = eta_minmax(s.calib_case, model, plan, tests, s.noise());
  const std::vector<Vec2> nodes = segment_points(
      s.trajectory.start, s.trajectory.end, s.trajectory.nodes);
  std::string csv = "node,x_mm,y_mm,eta_mm2,sqrt_eta_mm\n";
  for (int j = 0; j < tests.size(); ++j) {
    csv += fmt::format("{},{:.6f},{:.6f},{:.9e},{:.6f}\n", j, nodes[j].x(),
                       nodes[j].y(), r.eta_per_pose[j], r.rms_per_pose[j]);
  }
  fmt::print("experiments:        {}\n", plan.size());
  fmt::print("max sqrt(eta):      {:.6f} mm at node {}\n", r.rms_max(),
             r.argmax);
  fmt::print("D-optimality:       {:.6e}\n",
             d_optimality(s.calib_case, model, plan));
  fmt::print("SVD sigma_min:      {:.6e}\n",
             svd_observability(s.calib_case, model, plan));
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_text(std::filesystem::path(a.out) / "evaluation.csv", csv);
  }
  return kOk;
}

int run_validate(const Args& a) {
  Scenario s = load_scenario(a.scenario);
  if (a.seed) s.monte_carlo.seed = *a.seed;
  if (a.trials) s.monte_carlo.trials = *a.trials;
  s.validate();
  const Plan plan = load_plan(a.plan);
  const PlanarArmModel model = s.model();
  const TestPoseSet tests = scenario_test_poses(s);
  const MeasureReport r = eta_minmax(s.calib_case, model, plan, tests, s.noise());
  const TrialStats stats = run_monte_carlo(
      s.calib_case, model, s.ground_truth(), plan, tests, s.noise(),
      {.trials = s.monte_carlo.trials,
       .seed = s.monte_carlo.seed,
       .threads = s.monte_carlo.threads});
  std::string csv = "pose,analytic_eta_mm2,empirical_eta_mm2,trials\n";
  double worst = 0.0;
  for (int j = 0; j < tests.size(); ++j) {
    csv += fmt::format("{},{:.9e},{:.9e},{}\n", j, r.eta_per_pose[j],
                       stats.mean_squared_error[j], stats.trials);
    worst = std::max(worst, std::abs(stats.mean_squared_error[j] /
                                         r.eta_per_pose[j] - 1.0));
  }
  fmt::print("trials: {}  max |empirical/analytic - 1| = {:.2f}%\n",
             stats.trials, 100.0 * worst);
  if (a.out.empty()) {
    std::cout << csv;
  } else {
    write_text(std::filesystem::path(a.out) / "montecarlo.csv", csv);
  }
  return kOk;
}

int run_reproduce(const Args& a) {
  RunOptions opts;
  opts.seed = a.seed;
  opts.trials = a.trials;
  if (a.no_monte_carlo) opts.monte_carlo = false;
  opts.only = parse_criteria(a.criteria);
  const RunReport report = run_scenario(load_scenario(a.scenario), opts);
  write_outputs(report, a.out);
  std::cout << text_report(report);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Calibration plan design by test-pose accuracy measures"};
  app.require_subcommand(1);
  Args args;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("-s,--scenario", args.scenario, "Scenario JSON file")
        ->required()
        ->check(CLI::ExistingFile);
  };

  CLI::App* design = app.add_subcommand("design", "Optimize calibration plans");
  add_common(design);
  design->add_option("-o,--out", args.out, "Output directory");
  design->add_option("--seed", args.seed, "Override the optimizer seed");
  design->add_option("-c,--criterion", args.criteria,
                     "Restrict to these criteria");

  CLI::App* evaluate =
      app.add_subcommand("evaluate", "Accuracy profile of a given plan");
  add_common(evaluate);
  evaluate->add_option("-p,--plan", args.plan, "Plan CSV")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("-o,--out", args.out, "Output directory");

  CLI::App* validate =
      app.add_subcommand("validate", "Monte Carlo check of a given plan");
  add_common(validate);
  validate->add_option("-p,--plan", args.plan, "Plan CSV")
      ->required()
      ->check(CLI::ExistingFile);
  validate->add_option("-o,--out", args.out, "Output directory");
  validate->add_option("--trials", args.trials, "Override the trial count");
  validate->add_option("--seed", args.seed, "Override the Monte Carlo seed");

  CLI::App* reproduce =
      app.add_subcommand("reproduce", "Full design/evaluate/validate run");
  add_common(reproduce);
  reproduce->add_option("-o,--out", args.out, "Output directory")->required();
  reproduce->add_option("--seed", args.seed, "Override the optimizer seed");
  reproduce->add_option("--trials", args.trials, "Override the trial count");
  reproduce->add_option("-c,--criterion", args.criteria,
                        "Restrict to these criteria");
  reproduce->add_flag("--no-monte-carlo", args.no_monte_carlo,
                      "Skip Monte Carlo validation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*design) return run_design(args);
    if (*evaluate) return run_evaluate(args);
    if (*validate) return run_validate(args);
    if (*reproduce) return run_reproduce(args);
  } catch (const ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kConfig;
  } catch (const UnreachableTarget& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kConfig;
  } catch (const NoFeasiblePlan& e) {
    fmt::print(stderr, "infeasible design: {}\n", e.what());
    return kInfeasible;
  } catch (const SingularInformation& e) {
    fmt::print(stderr, "numerical failure: {}\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kFailure;
  }
  return kFailure;
}
