#ifndef POSECAL_OBSMODEL_H_
#define POSECAL_OBSMODEL_H_

// Linear observation model dp = B * dX + noise for the three calibration
// cases, the aggregated information matrix sum(B_i^T B_i), and the covariance
// of least-squares parameter estimates.

#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "posecal/manip.h"

namespace posecal {

// Parameter ordering:
//   kGeometric    (d_l1, d_l2, d_q1, d_q2)
//   kElastoStatic (k1, k2)
//   kCombined     (d_l1, d_l2, d_q1, d_q2, k1, k2)
enum class CalibCase { kGeometric, kElastoStatic, kCombined };

int parameter_dimension(CalibCase c);
std::string_view to_string(CalibCase c);
// Accepts "geometric", "elasto_static", "combined".
std::optional<CalibCase> parse_calib_case(std::string_view name);

struct Experiment {
  JointConfig q;
  Wrench f;

  bool operator==(const Experiment&) const = default;
};

// Ordered set of m >= 1 calibration experiments.
class Plan {
 public:
  explicit Plan(std::vector<Experiment> experiments);

  const std::vector<Experiment>& experiments() const { return experiments_; }
  int size() const { return static_cast<int>(experiments_.size()); }
  const Experiment& operator[](int i) const { return experiments_[i]; }

  // Same plan with every experiment repeated `times` times (in order).
  Plan repeated(int times) const;
  Plan with(const Experiment& extra) const;
  Plan concatenated(const Plan& other) const;

  bool operator==(const Plan&) const = default;

 private:
  std::vector<Experiment> experiments_;
};

// Isotropic i.i.d. measurement noise on each displacement component.
class NoiseSpec {
 public:
  // Throws std::invalid_argument unless sigma > 0.
  explicit NoiseSpec(double sigma_mm);
  double sigma() const { return sigma_; }

 private:
  double sigma_;
};

// 2 x p observation matrix for one experiment. The wrench is ignored in the
// geometric case.
Eigen::MatrixXd build_b(CalibCase c, const PlanarArmModel& model,
                        const JointConfig& q, const Wrench& f);

class InfoMatrix {
 public:
  // `sum` must be square; it is symmetrized on construction.
  explicit InfoMatrix(Eigen::MatrixXd sum);

  const Eigen::MatrixXd& matrix() const { return sum_; }
  int dimension() const { return static_cast<int>(sum_.rows()); }

  InfoMatrix operator+(const InfoMatrix& other) const;

 private:
  Eigen::MatrixXd sum_;
};

InfoMatrix information_matrix(CalibCase c, const PlanarArmModel& model,
                              const Plan& plan);

// Relative eigenvalue threshold below which a direction counts as
// unidentified.
inline constexpr double kRankTolerance = 1e-10;

// Rank of the information matrix after symmetric diagonal scaling to unit
// diagonal, so that the test does not depend on parameter units (mm, rad,
// rad/(N*mm) in the combined case). A zero diagonal entry is a zero column.
int identifiable_rank(const InfoMatrix& info);

struct Covariance {
  Eigen::MatrixXd matrix;  // sigma^2 * info^-1
  double min_eigenvalue = 0.0;  // of the unscaled information matrix
  double max_eigenvalue = 0.0;
  int rank = 0;
};

// Throws SingularInformation when rank < dimension.
Covariance covariance(const InfoMatrix& info, const NoiseSpec& noise);

}  // namespace posecal

#endif  // POSECAL_OBSMODEL_H_
