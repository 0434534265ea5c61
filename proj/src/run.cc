#include "posecal/run.h"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "posecal/errors.h"

namespace posecal {

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string column_label(const CriterionRun& run) {
  return fmt::format("{}_m{}", to_string(run.criterion), run.experiments);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error(
        fmt::format("cannot write '{}'", path.string()));
  }
  out << text;
  if (!out) {
    throw std::runtime_error(
        fmt::format("error writing '{}'", path.string()));
  }
}

}  // namespace

std::vector<Vec2> segment_points(const Vec2& start, const Vec2& end,
                                 int nodes) {
  if (nodes < 2) {
    throw std::invalid_argument(
        fmt::format("segmentation needs >= 2 nodes, got {}", nodes));
  }
  std::vector<Vec2> out;
  out.reserve(nodes);
  for (int j = 0; j < nodes; ++j) {
    const double t = static_cast<double>(j) / (nodes - 1);
    // Endpoints reproduced exactly.
    out.push_back(j == nodes - 1 ? end : Vec2(start + t * (end - start)));
  }
  return out;
}

TestPoseSet segment_trajectory(const PlanarArmModel& model, const Vec2& start,
                               const Vec2& end, int nodes, const Wrench& f0,
                               ElbowBranch branch) {
  std::vector<TestPose> poses;
  const std::vector<Vec2> points = segment_points(start, end, nodes);
  for (size_t j = 0; j < points.size(); ++j) {
    try {
      poses.push_back({inverse_kinematics(model, points[j], branch), f0});
    } catch (const UnreachableTarget& e) {
      throw UnreachableTarget(
          points[j].x(), points[j].y(),
          fmt::format("trajectory node {} is unreachable: {}", j, e.what()));
    }
  }
  return TestPoseSet(std::move(poses));
}

TestPoseSet scenario_test_poses(const Scenario& s) {
  const Wrench f0 = s.calib_case == CalibCase::kGeometric
                        ? Wrench::zero()
                        : s.trajectory.wrench;
  return segment_trajectory(s.model(), s.trajectory.start, s.trajectory.end,
                            s.trajectory.nodes, f0, s.trajectory.branch);
}

Scenario apply_options(Scenario s, const RunOptions& options) {
  if (options.seed) s.optimizer.seed = *options.seed;
  if (options.trials) s.monte_carlo.trials = *options.trials;
  if (options.monte_carlo) s.monte_carlo.enabled = *options.monte_carlo;
  if (!options.only.empty()) s.criteria = options.only;
  s.validate();
  return s;
}

RunReport run_scenario(const Scenario& input, const RunOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report{.scenario = apply_options(input, options),
                   .nodes = {},
                   .runs = {},
                   .started_utc = utc_now(),
                   .wall_seconds = 0.0};
  const Scenario& s = report.scenario;
  const PlanarArmModel model = s.model();
  const NoiseSpec noise = s.noise();
  const TestPoseSet tests = scenario_test_poses(s);
  report.nodes = segment_points(s.trajectory.start, s.trajectory.end,
                                s.trajectory.nodes);

  for (int m : s.experiment_counts) {
    for (Criterion criterion : s.criteria) {
      PlanResult design = optimize_plan(s.calib_case, model,
                                        s.design_space(m), criterion, tests,
                                        noise, s.optimizer);
      MeasureReport profile =
          eta_minmax(s.calib_case, model, design.plan, tests, noise);
      profile.criterion = criterion;
      std::optional<TrialStats> mc;
      if (s.monte_carlo.enabled) {
        mc = run_monte_carlo(s.calib_case, model, s.ground_truth(),
                             design.plan, tests, noise,
                             {.trials = s.monte_carlo.trials,
                              .seed = s.monte_carlo.seed,
                              .threads = s.monte_carlo.threads});
      }
      report.runs.push_back({criterion, m, std::move(design),
                             std::move(profile), std::move(mc)});
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

std::string profile_csv(const RunReport& report) {
  std::string out = "node,arc_length_mm,x_mm,y_mm";
  for (const CriterionRun& run : report.runs) {
    out += ",sqrt_eta_mm_" + column_label(run);
  }
  out += '\n';
  for (size_t j = 0; j < report.nodes.size(); ++j) {
    const Vec2& p = report.nodes[j];
    out += fmt::format("{},{:.6f},{:.6f},{:.6f}", j,
                       (p - report.nodes.front()).norm(), p.x(), p.y());
    for (const CriterionRun& run : report.runs) {
      out += fmt::format(",{:.6f}", run.profile.rms_per_pose[j]);
    }
    out += '\n';
  }
  return out;
}

std::string summary_csv(const RunReport& report) {
  std::string out = "criterion,m,max_sqrt_eta_mm,objective,seed\n";
  for (const CriterionRun& run : report.runs) {
    out += fmt::format("{},{},{:.6f},{:.9e},{}\n", to_string(run.criterion),
                       run.experiments, run.profile.rms_max(),
                       run.design.objective, report.scenario.optimizer.seed);
  }
  return out;
}

std::string montecarlo_csv(const RunReport& report) {
  std::string out =
      "criterion,m,pose,analytic_eta_mm2,empirical_eta_mm2,trials\n";
  for (const CriterionRun& run : report.runs) {
    if (!run.monte_carlo) continue;
    for (size_t j = 0; j < run.profile.eta_per_pose.size(); ++j) {
      out += fmt::format("{},{},{},{:.9e},{:.9e},{}\n",
                         to_string(run.criterion), run.experiments, j,
                         run.profile.eta_per_pose[j],
                         run.monte_carlo->mean_squared_error[j],
                         run.monte_carlo->trials);
    }
  }
  return out;
}

std::vector<ProfileEntry> profile_entries(const RunReport& report) {
  std::vector<ProfileEntry> out;
  for (const CriterionRun& run : report.runs) {
    out.push_back({std::string(to_string(run.criterion)), run.experiments,
                   report.nodes, run.profile});
  }
  return out;
}

std::string comparison_csv(const RunReport& report) {
  std::string out = "m,criterion,baseline,improvement_percent\n";
  for (const Improvement& imp : compare_report(profile_entries(report))) {
    out += fmt::format("{},{},{},{:.2f}\n", imp.experiments, imp.label,
                       imp.baseline, 100.0 * imp.fraction);
  }
  return out;
}

double rms_improvement(double rms, double baseline_rms) {
  if (!(baseline_rms > 0.0)) {
    throw std::invalid_argument("baseline RMS must be positive");
  }
  return 1.0 - rms / baseline_rms;
}

std::vector<Improvement> compare_report(
    const std::vector<ProfileEntry>& entries) {
  for (const ProfileEntry& e : entries) {
    if (e.nodes.size() != entries.front().nodes.size() ||
        e.measures.eta_per_pose.size() != e.nodes.size()) {
      throw ScenarioMismatch(fmt::format(
          "profile '{}' has {} nodes / {} values; '{}' has {} nodes", e.label,
          e.nodes.size(), e.measures.eta_per_pose.size(),
          entries.front().label, entries.front().nodes.size()));
    }
    for (size_t j = 0; j < e.nodes.size(); ++j) {
      if (e.nodes[j] != entries.front().nodes[j]) {
        throw ScenarioMismatch(fmt::format(
            "profile '{}' node {} differs from '{}'", e.label, j,
            entries.front().label));
      }
    }
  }
  std::vector<Improvement> out;
  for (size_t a = 0; a < entries.size(); ++a) {
    for (size_t b = 0; b < entries.size(); ++b) {
      if (a == b || entries[a].experiments != entries[b].experiments) continue;
      out.push_back({entries[a].experiments, entries[a].label,
                     entries[b].label,
                     rms_improvement(entries[a].measures.rms_max(),
                                     entries[b].measures.rms_max())});
    }
  }
  return out;
}

std::string text_report(const RunReport& report) {
  const Scenario& s = report.scenario;
  std::string out;
  out += fmt::format("posecal {} report\n", kVersion);
  out += fmt::format("scenario: {}\n", s.name.empty() ? "(unnamed)" : s.name);
  out += fmt::format("started: {}  wall time: {:.2f} s\n", report.started_utc,
                     report.wall_seconds);
  out += fmt::format(
      "arm: l1={} mm l2={} mm  case: {}  sigma: {} mm  force mode: {}\n",
      s.l1_mm, s.l2_mm, to_string(s.calib_case), s.sigma_mm,
      s.force_mode == ForceMode::kFixed ? "fixed" : "free_direction");
  out += fmt::format(
      "trajectory: ({}, {}) -> ({}, {}) mm, {} nodes, wrench ({}, {}) N\n",
      s.trajectory.start.x(), s.trajectory.start.y(), s.trajectory.end.x(),
      s.trajectory.end.y(), s.trajectory.nodes, s.trajectory.wrench.force.x(),
      s.trajectory.wrench.force.y());
  out += fmt::format("optimizer seed: {}  restarts: {}\n\n", s.optimizer.seed,
                     s.optimizer.restarts);

  out += "Maximum sqrt(eta) along the trajectory (mm)\n";
  out += fmt::format("  {:<20}", "criterion");
  for (int m : s.experiment_counts) out += fmt::format("{:>12}", fmt::format("m={}", m));
  out += '\n';
  for (Criterion c : s.criteria) {
    out += fmt::format("  {:<20}", to_string(c));
    for (int m : s.experiment_counts) {
      for (const CriterionRun& run : report.runs) {
        if (run.criterion == c && run.experiments == m) {
          out += fmt::format("{:>12.4f}", run.profile.rms_max());
        }
      }
    }
    out += '\n';
  }

  out += "\nImprovement (1 - rms/rms_baseline)\n";
  for (const Improvement& imp : compare_report(profile_entries(report))) {
    if (imp.fraction <= 0.0) continue;
    out += fmt::format("  m={}  {} vs {}: {:.1f}%\n", imp.experiments,
                       imp.label, imp.baseline, 100.0 * imp.fraction);
  }

  out += "\nPlans\n";
  for (const CriterionRun& run : report.runs) {
    out += fmt::format("  {} (objective {:.6e}, {:.2f} s)\n",
                       column_label(run), run.design.objective,
                       run.design.wall_seconds);
    for (const Experiment& e : run.design.plan.experiments()) {
      out += fmt::format("    q = ({:9.4f}, {:9.4f}) deg  f = ({:.2f}, {:.2f}) N\n",
                         e.q.q1() * 180.0 / std::numbers::pi, e.q.q2() * 180.0 / std::numbers::pi,
                         e.f.force.x(), e.f.force.y());
    }
  }

  bool any_mc = false;
  for (const CriterionRun& run : report.runs) {
    if (!run.monte_carlo) continue;
    if (!any_mc) {
      out += fmt::format("\nMonte Carlo validation ({} trials, seed {})\n",
                         run.monte_carlo->trials, s.monte_carlo.seed);
      any_mc = true;
    }
    double worst = 0.0;
    for (size_t j = 0; j < run.profile.eta_per_pose.size(); ++j) {
      worst = std::max(worst,
                       std::abs(run.monte_carlo->mean_squared_error[j] /
                                    run.profile.eta_per_pose[j] -
                                1.0));
    }
    out += fmt::format("  {}: max |empirical/analytic - 1| = {:.2f}%\n",
                       column_label(run), 100.0 * worst);
  }
  return out;
}

void write_outputs(const RunReport& report,
                   const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "profile.csv", profile_csv(report));
  write_file(out_dir / "summary.csv", summary_csv(report));
  write_file(out_dir / "comparison.csv", comparison_csv(report));
  bool any_mc = false;
  for (const CriterionRun& run : report.runs) any_mc |= run.monte_carlo.has_value();
  if (any_mc) write_file(out_dir / "montecarlo.csv", montecarlo_csv(report));
  for (const CriterionRun& run : report.runs) {
    write_file(out_dir / fmt::format("plan_{}.csv", column_label(run)),
               plan_csv(run.design.plan));
  }
  write_file(out_dir / "report.txt", text_report(report));
}

std::string plan_csv(const Plan& plan) {
  std::string out = "q1_rad,q2_rad,fx_n,fy_n\n";
  for (const Experiment& e : plan.experiments()) {
    out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", e.q.q1(), e.q.q2(),
                       e.f.force.x(), e.f.force.y());
  }
  return out;
}

Plan parse_plan_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("plan file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "q1_rad,q2_rad,fx_n,fy_n") {
    throw ConfigError(fmt::format("unexpected plan header '{}'", line));
  }
  std::vector<Experiment> experiments;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 4> v{};
    std::istringstream fields(line);
    std::string cell;
    int n = 0;
    while (std::getline(fields, cell, ',')) {
      if (n == 4) break;
      try {
        size_t used = 0;
        v[n] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ConfigError(
            fmt::format("plan row {}: '{}' is not a number", row, cell));
      }
      ++n;
    }
    if (n != 4 || std::getline(fields, cell)) {
      throw ConfigError(fmt::format("plan row {} needs 4 columns", row));
    }
    try {
      experiments.push_back({JointConfig(v[0], v[1]), Wrench::of(v[2], v[3])});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(fmt::format("plan row {}: {}", row, e.what()));
    }
  }
  if (experiments.empty()) throw ConfigError("plan has no experiments");
  return Plan(std::move(experiments));
}

Plan load_plan(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("cannot open plan '{}'", path.string()));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_plan_csv(buf.str());
}

}  // namespace posecal
