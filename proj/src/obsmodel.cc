#include "posecal/obsmodel.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "posecal/errors.h"

namespace posecal {

int parameter_dimension(CalibCase c) {
  switch (c) {
    case CalibCase::kGeometric:
      return 4;
    case CalibCase::kElastoStatic:
      return PlanarArmModel::kJoints;
    case CalibCase::kCombined:
      return 4 + PlanarArmModel::kJoints;
  }
  throw std::invalid_argument("unknown calibration case");
}

std::string_view to_string(CalibCase c) {
  switch (c) {
    case CalibCase::kGeometric:
      return "geometric";
    case CalibCase::kElastoStatic:
      return "elasto_static";
    case CalibCase::kCombined:
      return "combined";
  }
  return "unknown";
}

std::optional<CalibCase> parse_calib_case(std::string_view name) {
  for (CalibCase c : {CalibCase::kGeometric, CalibCase::kElastoStatic,
                      CalibCase::kCombined}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

Plan::Plan(std::vector<Experiment> experiments)
    : experiments_(std::move(experiments)) {
  if (experiments_.empty()) {
    throw std::invalid_argument("a plan needs at least one experiment");
  }
}

Plan Plan::repeated(int times) const {
  if (times < 1) throw std::invalid_argument("repeat count must be >= 1");
  std::vector<Experiment> out;
  out.reserve(experiments_.size() * times);
  for (int r = 0; r < times; ++r) {
    out.insert(out.end(), experiments_.begin(), experiments_.end());
  }
  return Plan(std::move(out));
}

Plan Plan::with(const Experiment& extra) const {
  std::vector<Experiment> out = experiments_;
  out.push_back(extra);
  return Plan(std::move(out));
}

Plan Plan::concatenated(const Plan& other) const {
  std::vector<Experiment> out = experiments_;
  out.insert(out.end(), other.experiments_.begin(), other.experiments_.end());
  return Plan(std::move(out));
}

NoiseSpec::NoiseSpec(double sigma_mm) : sigma_(sigma_mm) {
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) {
    throw std::invalid_argument(
        fmt::format("noise sigma must be positive, got {}", sigma_));
  }
}

Eigen::MatrixXd build_b(CalibCase c, const PlanarArmModel& model,
                        const JointConfig& q, const Wrench& f) {
  switch (c) {
    case CalibCase::kGeometric:
      return geometric_identification_jacobian(model, q);
    case CalibCase::kElastoStatic:
      return amatrix(model, q, f);
    case CalibCase::kCombined: {
      Eigen::MatrixXd b(2, 6);
      b << geometric_identification_jacobian(model, q), amatrix(model, q, f);
      return b;
    }
  }
  throw std::invalid_argument("unknown calibration case");
}

InfoMatrix::InfoMatrix(Eigen::MatrixXd sum) : sum_(std::move(sum)) {
  if (sum_.rows() != sum_.cols()) {
    throw std::invalid_argument("information matrix must be square");
  }
  sum_ = 0.5 * (sum_ + sum_.transpose()).eval();
}

InfoMatrix InfoMatrix::operator+(const InfoMatrix& other) const {
  if (other.dimension() != dimension()) {
    throw std::invalid_argument("information matrix dimensions differ");
  }
  return InfoMatrix(sum_ + other.sum_);
}

InfoMatrix information_matrix(CalibCase c, const PlanarArmModel& model,
                              const Plan& plan) {
  const int p = parameter_dimension(c);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
  for (const Experiment& e : plan.experiments()) {
    const Eigen::MatrixXd b = build_b(c, model, e.q, e.f);
    sum.noalias() += b.transpose() * b;
  }
  return InfoMatrix(std::move(sum));
}

namespace {

struct ScaledEigen {
  Eigen::VectorXd scale;  // D, with D * info * D having unit diagonal
  Eigen::VectorXd eigenvalues;  // of D * info * D, ascending
  Eigen::MatrixXd eigenvectors;
  int rank = 0;
};

ScaledEigen scaled_eigen(const InfoMatrix& info) {
  const Eigen::MatrixXd& m = info.matrix();
  ScaledEigen out;
  out.scale = m.diagonal().unaryExpr(
      [](double d) { return d > 0.0 ? 1.0 / std::sqrt(d) : 1.0; });
  const Eigen::MatrixXd scaled =
      out.scale.asDiagonal() * m * out.scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scaled);
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  const double top = out.eigenvalues.maxCoeff();
  if (top > 0.0) {
    const double threshold = kRankTolerance * top;
    out.rank = static_cast<int>((out.eigenvalues.array() > threshold).count());
  }
  return out;
}

}  // namespace

int identifiable_rank(const InfoMatrix& info) {
  return scaled_eigen(info).rank;
}

Covariance covariance(const InfoMatrix& info, const NoiseSpec& noise) {
  const ScaledEigen eig = scaled_eigen(info);
  const Eigen::VectorXd raw =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(info.matrix(),
                                                     Eigen::EigenvaluesOnly)
          .eigenvalues();
  const int p = info.dimension();
  Covariance out;
  out.min_eigenvalue = raw(0);
  out.max_eigenvalue = raw(p - 1);
  out.rank = eig.rank;
  if (eig.rank < p) {
    throw SingularInformation(
        eig.rank, p,
        fmt::format("information matrix has rank {} < {} (eigenvalues {:.3e} "
                    "to {:.3e}); the plan does not identify all parameters",
                    eig.rank, p, out.min_eigenvalue, out.max_eigenvalue));
  }
  // info^-1 = D * (D info D)^-1 * D
  const Eigen::MatrixXd v = eig.scale.asDiagonal() * eig.eigenvectors;
  const double s2 = noise.sigma() * noise.sigma();
  out.matrix = s2 * v * eig.eigenvalues.cwiseInverse().asDiagonal() *
               v.transpose();
  out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
  return out;
}

}  // namespace posecal
