#ifndef POSECAL_SCENARIO_H_
#define POSECAL_SCENARIO_H_

// Declarative scenario files. The format is JSON; see README.md for the
// schema. Parsing is strict: unknown keys and wrong types are ConfigErrors.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "posecal/manip.h"
#include "posecal/measures.h"
#include "posecal/obsmodel.h"
#include "posecal/planner.h"
#include "posecal/simcal.h"

namespace posecal {

inline constexpr int kScenarioSchemaVersion = 1;

struct TrajectorySpec {
  Vec2 start = Vec2(-600.0, 400.0);
  Vec2 end = Vec2(600.0, 400.0);
  int nodes = 25;
  ElbowBranch branch = ElbowBranch::kUp;
  Wrench wrench = Wrench::of(0.0, 100.0);  // test wrench at every node

  bool operator==(const TrajectorySpec&) const = default;
};

struct MonteCarloSpec {
  bool enabled = true;
  int trials = 10000;
  std::uint64_t seed = 7;
  int threads = 1;
  GeomParams true_geometry;
  Vec2 true_compliance = Vec2(1e-5, 2e-5);

  bool operator==(const MonteCarloSpec& o) const;
};

struct Scenario {
  int schema_version = kScenarioSchemaVersion;
  std::string name;
  double l1_mm = 600.0;
  double l2_mm = 400.0;
  CalibCase calib_case = CalibCase::kElastoStatic;
  std::vector<int> experiment_counts = {1};
  double sigma_mm = 0.1;
  ForceMode force_mode = ForceMode::kFixed;
  double force_magnitude_n = 100.0;
  std::array<AngleInterval, PlanarArmModel::kJoints> joint_bounds{};
  TrajectorySpec trajectory;
  std::vector<Criterion> criteria = {Criterion::kSvdObservability,
                                     Criterion::kDOptimality,
                                     Criterion::kEtaMinMax};
  OptimizerConfig optimizer;
  MonteCarloSpec monte_carlo;

  PlanarArmModel model() const { return {l1_mm, l2_mm}; }
  NoiseSpec noise() const { return NoiseSpec(sigma_mm); }
  GroundTruth ground_truth() const;
  // Design space for `experiments` calibration experiments. In kFixed mode
  // every calibration experiment applies the trajectory wrench.
  DesignSpace design_space(int experiments) const;

  // Throws ConfigError on violated invariants (nodes >= 2, sigma > 0, ...).
  void validate() const;

  bool operator==(const Scenario& o) const;
};

Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);
// Pretty-printed JSON with every field present.
std::string serialize_scenario(const Scenario& scenario);

}  // namespace posecal

#endif  // POSECAL_SCENARIO_H_
