#include "posecal/scenario.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "posecal/errors.h"

namespace posecal {

namespace {

using nlohmann::json;

// Rejects keys that the schema does not know about.
void check_keys(const json& obj, std::string_view where,
                std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw ConfigError(fmt::format("'{}' must be an object", where));
  }
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(fmt::format("unknown key '{}' in '{}'", key, where));
    }
  }
}

template <typename T>
T get(const json& obj, std::string_view where, const char* key,
      const T& fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("'{}.{}': {}", where, key, e.what()));
  }
}

Vec2 get_vec2(const json& obj, std::string_view where, const char* key,
              const Vec2& fallback) {
  const auto v = get<std::vector<double>>(obj, where, key,
                                          {fallback.x(), fallback.y()});
  if (v.size() != 2) {
    throw ConfigError(
        fmt::format("'{}.{}' must have exactly 2 entries", where, key));
  }
  return {v[0], v[1]};
}

json vec2_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

std::string_view force_mode_name(ForceMode m) {
  return m == ForceMode::kFixed ? "fixed" : "free_direction";
}

}  // namespace

bool MonteCarloSpec::operator==(const MonteCarloSpec& o) const {
  return enabled == o.enabled && trials == o.trials && seed == o.seed &&
         threads == o.threads &&
         true_geometry.as_vector() == o.true_geometry.as_vector() &&
         true_compliance == o.true_compliance;
}

bool Scenario::operator==(const Scenario& o) const {
  auto bounds_eq = [](const auto& a, const auto& b) {
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i].lo != b[i].lo || a[i].hi != b[i].hi) return false;
    }
    return true;
  };
  return schema_version == o.schema_version && name == o.name &&
         l1_mm == o.l1_mm && l2_mm == o.l2_mm && calib_case == o.calib_case &&
         experiment_counts == o.experiment_counts && sigma_mm == o.sigma_mm &&
         force_mode == o.force_mode &&
         force_magnitude_n == o.force_magnitude_n &&
         bounds_eq(joint_bounds, o.joint_bounds) &&
         trajectory == o.trajectory && criteria == o.criteria &&
         optimizer.restarts == o.optimizer.restarts &&
         optimizer.max_iterations == o.optimizer.max_iterations &&
         optimizer.tolerance == o.optimizer.tolerance &&
         optimizer.seed == o.optimizer.seed &&
         optimizer.threads == o.optimizer.threads &&
         monte_carlo == o.monte_carlo;
}

GroundTruth Scenario::ground_truth() const {
  GroundTruth t;
  t.geom = monte_carlo.true_geometry;
  t.compliance.k = monte_carlo.true_compliance;
  return t;
}

DesignSpace Scenario::design_space(int experiments) const {
  DesignSpace s;
  s.experiments = experiments;
  s.joint_bounds = joint_bounds;
  s.force_mode = force_mode;
  s.fixed_wrench = trajectory.wrench;
  s.force_magnitude = force_magnitude_n;
  return s;
}

void Scenario::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (schema_version != kScenarioSchemaVersion) {
    fail(fmt::format("unsupported schema_version {} (expected {})",
                     schema_version, kScenarioSchemaVersion));
  }
  try {
    model();
    noise();
    for (int m : experiment_counts) design_space(m).validate();
    optimizer.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (experiment_counts.empty()) fail("at least one experiment count needed");
  if (criteria.empty()) fail("at least one criterion needed");
  if (trajectory.nodes < 2) {
    fail(fmt::format("trajectory needs >= 2 nodes, got {}", trajectory.nodes));
  }
  if (!trajectory.start.allFinite() || !trajectory.end.allFinite() ||
      !trajectory.wrench.force.allFinite()) {
    fail("trajectory values must be finite");
  }
  for (Criterion c : criteria) {
    if (c == Criterion::kEtaSingle) {
      fail("eta_single is not available for trajectory scenarios; use "
           "eta_minmax");
    }
  }
  for (const Vec2& end : {trajectory.start, trajectory.end}) {
    try {
      inverse_kinematics(model(), end, trajectory.branch);
    } catch (const UnreachableTarget& e) {
      fail(fmt::format("trajectory endpoint unreachable: {}", e.what()));
    }
  }
  if (monte_carlo.trials < 1) fail("monte_carlo.trials must be >= 1");
  if (!(monte_carlo.true_compliance.array() > 0.0).all()) {
    fail("monte_carlo.true_compliance entries must be positive");
  }
}

Scenario parse_scenario(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end(), nullptr, true,
                       /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("scenario is not valid JSON: {}", e.what()));
  }
  check_keys(root, "<root>",
             {"schema_version", "name", "manipulator", "calibration",
              "trajectory", "criteria", "optimizer", "monte_carlo"});
  Scenario s;
  s.schema_version = get<int>(root, "<root>", "schema_version", -1);
  if (s.schema_version == -1) throw ConfigError("missing schema_version");
  s.name = get<std::string>(root, "<root>", "name", "");

  const json empty = json::object();
  const json& manip = root.contains("manipulator") ? root["manipulator"] : empty;
  check_keys(manip, "manipulator", {"l1_mm", "l2_mm"});
  s.l1_mm = get<double>(manip, "manipulator", "l1_mm", s.l1_mm);
  s.l2_mm = get<double>(manip, "manipulator", "l2_mm", s.l2_mm);

  const json& cal = root.contains("calibration") ? root["calibration"] : empty;
  check_keys(cal, "calibration",
             {"case", "experiments", "sigma_mm", "force_mode",
              "force_magnitude_n", "joint_bounds_rad"});
  const std::string case_name =
      get<std::string>(cal, "calibration", "case", "elasto_static");
  const auto parsed_case = parse_calib_case(case_name);
  if (!parsed_case) {
    throw ConfigError(fmt::format("unknown calibration case '{}'", case_name));
  }
  s.calib_case = *parsed_case;
  if (cal.contains("experiments") && cal["experiments"].is_number_integer()) {
    s.experiment_counts = {cal["experiments"].get<int>()};
  } else {
    s.experiment_counts = get<std::vector<int>>(cal, "calibration",
                                                "experiments",
                                                s.experiment_counts);
  }
  s.sigma_mm = get<double>(cal, "calibration", "sigma_mm", s.sigma_mm);
  const std::string mode =
      get<std::string>(cal, "calibration", "force_mode", "fixed");
  if (mode == "fixed") {
    s.force_mode = ForceMode::kFixed;
  } else if (mode == "free_direction") {
    s.force_mode = ForceMode::kFreeDirection;
  } else {
    throw ConfigError(fmt::format("unknown force_mode '{}'", mode));
  }
  s.force_magnitude_n =
      get<double>(cal, "calibration", "force_magnitude_n", s.force_magnitude_n);
  if (cal.contains("joint_bounds_rad")) {
    const auto b = get<std::vector<std::vector<double>>>(
        cal, "calibration", "joint_bounds_rad", {});
    if (b.size() != s.joint_bounds.size()) {
      throw ConfigError("calibration.joint_bounds_rad needs one [lo, hi] per joint");
    }
    for (size_t i = 0; i < b.size(); ++i) {
      if (b[i].size() != 2) {
        throw ConfigError("calibration.joint_bounds_rad entries are [lo, hi]");
      }
      s.joint_bounds[i] = {b[i][0], b[i][1]};
    }
  }

  const json& traj = root.contains("trajectory") ? root["trajectory"] : empty;
  check_keys(traj, "trajectory",
             {"start_mm", "end_mm", "nodes", "elbow", "wrench_n"});
  s.trajectory.start =
      get_vec2(traj, "trajectory", "start_mm", s.trajectory.start);
  s.trajectory.end = get_vec2(traj, "trajectory", "end_mm", s.trajectory.end);
  s.trajectory.nodes =
      get<int>(traj, "trajectory", "nodes", s.trajectory.nodes);
  const std::string elbow = get<std::string>(traj, "trajectory", "elbow", "up");
  if (elbow == "up") {
    s.trajectory.branch = ElbowBranch::kUp;
  } else if (elbow == "down") {
    s.trajectory.branch = ElbowBranch::kDown;
  } else {
    throw ConfigError(fmt::format("trajectory.elbow must be up/down, got '{}'",
                                  elbow));
  }
  s.trajectory.wrench.force =
      get_vec2(traj, "trajectory", "wrench_n", s.trajectory.wrench.force);

  if (root.contains("criteria")) {
    s.criteria.clear();
    for (const std::string& name :
         get<std::vector<std::string>>(root, "<root>", "criteria", {})) {
      const auto c = parse_criterion(name);
      if (!c) throw ConfigError(fmt::format("unknown criterion '{}'", name));
      s.criteria.push_back(*c);
    }
  }

  const json& opt = root.contains("optimizer") ? root["optimizer"] : empty;
  check_keys(opt, "optimizer",
             {"restarts", "max_iterations", "tolerance", "seed", "threads"});
  s.optimizer.restarts =
      get<int>(opt, "optimizer", "restarts", s.optimizer.restarts);
  s.optimizer.max_iterations =
      get<int>(opt, "optimizer", "max_iterations", s.optimizer.max_iterations);
  s.optimizer.tolerance =
      get<double>(opt, "optimizer", "tolerance", s.optimizer.tolerance);
  s.optimizer.seed =
      get<std::uint64_t>(opt, "optimizer", "seed", s.optimizer.seed);
  s.optimizer.threads =
      get<int>(opt, "optimizer", "threads", s.optimizer.threads);

  const json& mc = root.contains("monte_carlo") ? root["monte_carlo"] : empty;
  check_keys(mc, "monte_carlo",
             {"enabled", "trials", "seed", "threads", "true_geometry",
              "true_compliance"});
  s.monte_carlo.enabled =
      get<bool>(mc, "monte_carlo", "enabled", s.monte_carlo.enabled);
  s.monte_carlo.trials =
      get<int>(mc, "monte_carlo", "trials", s.monte_carlo.trials);
  s.monte_carlo.seed =
      get<std::uint64_t>(mc, "monte_carlo", "seed", s.monte_carlo.seed);
  s.monte_carlo.threads =
      get<int>(mc, "monte_carlo", "threads", s.monte_carlo.threads);
  const auto g = get<std::vector<double>>(mc, "monte_carlo", "true_geometry",
                                          {0.0, 0.0, 0.0, 0.0});
  if (g.size() != 4) {
    throw ConfigError("monte_carlo.true_geometry is [d_l1, d_l2, d_q1, d_q2]");
  }
  s.monte_carlo.true_geometry = {g[0], g[1], g[2], g[3]};
  s.monte_carlo.true_compliance = get_vec2(mc, "monte_carlo", "true_compliance",
                                           s.monte_carlo.true_compliance);

  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(fmt::format("cannot open scenario '{}'", path.string()));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  json root;
  root["schema_version"] = s.schema_version;
  root["name"] = s.name;
  root["manipulator"] = {{"l1_mm", s.l1_mm}, {"l2_mm", s.l2_mm}};
  json bounds = json::array();
  for (const AngleInterval& b : s.joint_bounds) {
    bounds.push_back(json::array({b.lo, b.hi}));
  }
  root["calibration"] = {{"case", std::string(to_string(s.calib_case))},
                         {"experiments", s.experiment_counts},
                         {"sigma_mm", s.sigma_mm},
                         {"force_mode", std::string(force_mode_name(s.force_mode))},
                         {"force_magnitude_n", s.force_magnitude_n},
                         {"joint_bounds_rad", bounds}};
  root["trajectory"] = {
      {"start_mm", vec2_json(s.trajectory.start)},
      {"end_mm", vec2_json(s.trajectory.end)},
      {"nodes", s.trajectory.nodes},
      {"elbow", s.trajectory.branch == ElbowBranch::kUp ? "up" : "down"},
      {"wrench_n", vec2_json(s.trajectory.wrench.force)}};
  json criteria = json::array();
  for (Criterion c : s.criteria) criteria.push_back(std::string(to_string(c)));
  root["criteria"] = criteria;
  root["optimizer"] = {{"restarts", s.optimizer.restarts},
                       {"max_iterations", s.optimizer.max_iterations},
                       {"tolerance", s.optimizer.tolerance},
                       {"seed", s.optimizer.seed},
                       {"threads", s.optimizer.threads}};
  const Eigen::Vector4d g = s.monte_carlo.true_geometry.as_vector();
  root["monte_carlo"] = {
      {"enabled", s.monte_carlo.enabled},
      {"trials", s.monte_carlo.trials},
      {"seed", s.monte_carlo.seed},
      {"threads", s.monte_carlo.threads},
      {"true_geometry", json::array({g(0), g(1), g(2), g(3)})},
      {"true_compliance", vec2_json(s.monte_carlo.true_compliance)}};
  return root.dump(2) + "\n";
}

}  // namespace posecal
