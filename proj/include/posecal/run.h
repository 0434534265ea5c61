#ifndef POSECAL_RUN_H_
#define POSECAL_RUN_H_

// Scenario pipeline: trajectory segmentation into test poses, plan design per
// criterion, accuracy profiles along the trajectory, optional Monte Carlo
// validation, and the CSV / text outputs.
//
// Output files (all CSV with a header row, '\n' line endings):
//   profile.csv     node, arc_length_mm, x_mm, y_mm,
//                   sqrt_eta_mm_<criterion>_m<m> ...
//   summary.csv     criterion, m, max_sqrt_eta_mm, objective, seed
//   montecarlo.csv  criterion, m, pose, analytic_eta_mm2, empirical_eta_mm2,
//                   trials
//   comparison.csv  m, criterion, baseline, improvement_percent
//   report.txt      human-readable summary with provenance

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "posecal/measures.h"
#include "posecal/planner.h"
#include "posecal/scenario.h"
#include "posecal/simcal.h"

namespace posecal {

inline constexpr std::string_view kVersion = "1.0.0";

// `nodes` evenly spaced points from start to end, inclusive.
std::vector<Vec2> segment_points(const Vec2& start, const Vec2& end,
                                 int nodes);

// Test poses at evenly spaced points of the segment, each solved by inverse
// kinematics on `branch` and loaded with `f0`. Throws UnreachableTarget
// naming the first offending node.
TestPoseSet segment_trajectory(const PlanarArmModel& model, const Vec2& start,
                               const Vec2& end, int nodes, const Wrench& f0,
                               ElbowBranch branch = ElbowBranch::kUp);

TestPoseSet scenario_test_poses(const Scenario& scenario);

struct CriterionRun {
  Criterion criterion;
  int experiments;
  PlanResult design;
  MeasureReport profile;  // eta at every trajectory node
  std::optional<TrialStats> monte_carlo;
};

struct RunReport {
  Scenario scenario;
  std::vector<Vec2> nodes;
  std::vector<CriterionRun> runs;  // experiment count major, criteria minor
  std::string started_utc;
  double wall_seconds = 0.0;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;  // overrides optimizer.seed
  std::optional<int> trials;          // overrides monte_carlo.trials
  std::optional<bool> monte_carlo;    // overrides monte_carlo.enabled
  std::vector<Criterion> only;        // restrict criteria when non-empty
};

// Applies `options` to a copy of the scenario.
Scenario apply_options(Scenario scenario, const RunOptions& options);

RunReport run_scenario(const Scenario& scenario,
                       const RunOptions& options = {});

// Writes profile.csv, summary.csv, comparison.csv, report.txt and, when any
// run carries Monte Carlo statistics, montecarlo.csv.
void write_outputs(const RunReport& report,
                   const std::filesystem::path& out_dir);

std::string profile_csv(const RunReport& report);
std::string summary_csv(const RunReport& report);
std::string montecarlo_csv(const RunReport& report);
std::string comparison_csv(const RunReport& report);
std::string text_report(const RunReport& report);

// One accuracy profile along the trajectory, as compared by compare_report.
struct ProfileEntry {
  std::string label;
  int experiments = 1;
  std::vector<Vec2> nodes;
  MeasureReport measures;
};

struct Improvement {
  int experiments;
  std::string label;     // the plan being credited
  std::string baseline;  // the plan it is compared against
  double fraction;       // 1 - max_rms(label) / max_rms(baseline)
};

double rms_improvement(double rms, double baseline_rms);

// Ordered pairwise improvements between entries with equal experiment count.
// Throws ScenarioMismatch if the entries do not share node geometry.
std::vector<Improvement> compare_report(
    const std::vector<ProfileEntry>& entries);

std::vector<ProfileEntry> profile_entries(const RunReport& report);

// Plan files: header "q1_rad,q2_rad,fx_n,fy_n", one experiment per row.
std::string plan_csv(const Plan& plan);
Plan parse_plan_csv(std::string_view text);
Plan load_plan(const std::filesystem::path& path);

}  // namespace posecal

#endif  // POSECAL_RUN_H_
