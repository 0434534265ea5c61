#ifndef POSECAL_MEASURES_H_
#define POSECAL_MEASURES_H_

// Accuracy measures for calibration plans.
//
// The test-pose measures score a plan by the expected squared end-effector
// error that remains at a user-given machining configuration after the
// identified parameters are used for compensation:
//
//   eta(test) = sigma^2 * trace(B0 * (sum_i B_i^T B_i)^-1 * B0^T)   [mm^2]
//
// and, for a trajectory discretized into node poses, the worst node:
//
//   eta_t = max_j eta(test_j).
//
// D-optimality and the minimum singular value of the stacked observation
// matrix are provided as the classical comparators.

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "posecal/manip.h"
#include "posecal/obsmodel.h"

namespace posecal {

struct TestPose {
  JointConfig q0;
  Wrench f0;  // zero for geometric calibration
};

class TestPoseSet {
 public:
  explicit TestPoseSet(std::vector<TestPose> poses);

  const std::vector<TestPose>& poses() const { return poses_; }
  int size() const { return static_cast<int>(poses_.size()); }
  const TestPose& operator[](int i) const { return poses_[i]; }

 private:
  std::vector<TestPose> poses_;
};

enum class Criterion {
  kEtaSingle,        // minimize eta at the single test pose
  kEtaMinMax,        // minimize max eta over the test pose set
  kDOptimality,      // maximize det(information matrix)
  kSvdObservability  // maximize sigma_min of the stacked observation matrix
};

std::string_view to_string(Criterion c);
// Accepts the to_string names plus the aliases "test_pose" (eta_minmax),
// "d_opt" and "svd".
std::optional<Criterion> parse_criterion(std::string_view name);
bool is_maximized(Criterion c);
bool needs_test_poses(Criterion c);

struct MeasureReport {
  std::vector<double> eta_per_pose;  // mm^2
  std::vector<double> rms_per_pose;  // sqrt(eta), mm
  double eta_max = 0.0;
  int argmax = 0;
  Criterion criterion = Criterion::kEtaMinMax;

  double rms_max() const;
};

// trace(b0 * cov * b0^T) without forming the product.
double propagated_mean_square(const Eigen::MatrixXd& b0,
                              const Eigen::MatrixXd& cov);

// Throws SingularInformation when the plan is not identifiable.
double eta_single(CalibCase c, const PlanarArmModel& model, const Plan& plan,
                  const TestPose& test, const NoiseSpec& noise);

MeasureReport eta_minmax(CalibCase c, const PlanarArmModel& model,
                         const Plan& plan, const TestPoseSet& tests,
                         const NoiseSpec& noise);

// Same, from an already computed covariance.
MeasureReport eta_minmax(CalibCase c, const PlanarArmModel& model,
                         const Eigen::MatrixXd& cov, const TestPoseSet& tests);

// det(sum B_i^T B_i); 0 for plans that do not identify every parameter.
double d_optimality(CalibCase c, const PlanarArmModel& model,
                    const Plan& plan);

// sqrt of the smallest eigenvalue of the information matrix, which equals the
// smallest singular value of the vertically stacked B_i; 0 for plans that do
// not identify every parameter.
double svd_observability(CalibCase c, const PlanarArmModel& model,
                         const Plan& plan);

double d_optimality(const InfoMatrix& info);
double svd_observability(const InfoMatrix& info);

}  // namespace posecal

#endif  // POSECAL_MEASURES_H_
