#include "posecal/measures.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace posecal {

TestPoseSet::TestPoseSet(std::vector<TestPose> poses)
    : poses_(std::move(poses)) {
  if (poses_.empty()) {
    throw std::invalid_argument("a test pose set needs at least one pose");
  }
}

std::string_view to_string(Criterion c) {
  switch (c) {
    case Criterion::kEtaSingle:
      return "eta_single";
    case Criterion::kEtaMinMax:
      return "eta_minmax";
    case Criterion::kDOptimality:
      return "d_optimality";
    case Criterion::kSvdObservability:
      return "svd_observability";
  }
  return "unknown";
}

std::optional<Criterion> parse_criterion(std::string_view name) {
  for (Criterion c : {Criterion::kEtaSingle, Criterion::kEtaMinMax,
                      Criterion::kDOptimality, Criterion::kSvdObservability}) {
    if (to_string(c) == name) return c;
  }
  if (name == "test_pose") return Criterion::kEtaMinMax;
  if (name == "d_opt") return Criterion::kDOptimality;
  if (name == "svd") return Criterion::kSvdObservability;
  return std::nullopt;
}

bool is_maximized(Criterion c) {
  return c == Criterion::kDOptimality || c == Criterion::kSvdObservability;
}

bool needs_test_poses(Criterion c) { return !is_maximized(c); }

double MeasureReport::rms_max() const { return std::sqrt(eta_max); }

double propagated_mean_square(const Eigen::MatrixXd& b0,
                              const Eigen::MatrixXd& cov) {
  return (b0 * cov).cwiseProduct(b0).sum();
}

double eta_single(CalibCase c, const PlanarArmModel& model, const Plan& plan,
                  const TestPose& test, const NoiseSpec& noise) {
  const Covariance cov =
      covariance(information_matrix(c, model, plan), noise);
  return std::max(
      propagated_mean_square(build_b(c, model, test.q0, test.f0), cov.matrix),
      0.0);
}

MeasureReport eta_minmax(CalibCase c, const PlanarArmModel& model,
                         const Eigen::MatrixXd& cov, const TestPoseSet& tests) {
  MeasureReport r;
  r.criterion = Criterion::kEtaMinMax;
  r.eta_per_pose.reserve(tests.size());
  r.rms_per_pose.reserve(tests.size());
  for (int j = 0; j < tests.size(); ++j) {
    const double eta = std::max(
        propagated_mean_square(build_b(c, model, tests[j].q0, tests[j].f0),
                               cov),
        0.0);
    r.eta_per_pose.push_back(eta);
    r.rms_per_pose.push_back(std::sqrt(eta));
    if (j == 0 || eta > r.eta_max) {
      r.eta_max = eta;
      r.argmax = j;
    }
  }
  return r;
}

MeasureReport eta_minmax(CalibCase c, const PlanarArmModel& model,
                         const Plan& plan, const TestPoseSet& tests,
                         const NoiseSpec& noise) {
  const Covariance cov =
      covariance(information_matrix(c, model, plan), noise);
  return eta_minmax(c, model, cov.matrix, tests);
}

double d_optimality(const InfoMatrix& info) {
  if (identifiable_rank(info) < info.dimension()) return 0.0;
  return info.matrix().determinant();
}

double svd_observability(const InfoMatrix& info) {
  if (identifiable_rank(info) < info.dimension()) return 0.0;
  const double lambda_min =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(info.matrix(),
                                                     Eigen::EigenvaluesOnly)
          .eigenvalues()(0);
  return std::sqrt(std::max(lambda_min, 0.0));
}

double d_optimality(CalibCase c, const PlanarArmModel& model,
                    const Plan& plan) {
  return d_optimality(information_matrix(c, model, plan));
}

double svd_observability(CalibCase c, const PlanarArmModel& model,
                         const Plan& plan) {
  return svd_observability(information_matrix(c, model, plan));
}

}  // namespace posecal
