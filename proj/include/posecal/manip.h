#ifndef POSECAL_MANIP_H_
#define POSECAL_MANIP_H_

// Kinematics and elasto-statics of a planar two-link arm with rigid links and
// compliant joints.
//
// Units throughout: lengths in mm, forces in N, angles in rad, joint
// compliances in rad/(N*mm).

#include <Eigen/Core>

namespace posecal {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Mat24 = Eigen::Matrix<double, 2, 4>;

// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

class PlanarArmModel {
 public:
  static constexpr int kJoints = 2;

  // Throws std::invalid_argument unless both lengths are positive and finite.
  PlanarArmModel(double l1_mm, double l2_mm);

  double l1() const { return l1_; }
  double l2() const { return l2_; }
  double min_reach() const;
  double max_reach() const { return l1_ + l2_; }

  bool operator==(const PlanarArmModel&) const = default;

 private:
  double l1_;
  double l2_;
};

// Joint angles, always stored normalized to (-pi, pi].
class JointConfig {
 public:
  JointConfig() = default;
  JointConfig(double q1, double q2);

  double q1() const { return q_[0]; }
  double q2() const { return q_[1]; }
  const Vec2& angles() const { return q_; }

  bool operator==(const JointConfig& other) const { return q_ == other.q_; }

 private:
  Vec2 q_ = Vec2::Zero();
};

// End-effector load. Planar force only; no torque component is modelled.
struct Wrench {
  Vec2 force = Vec2::Zero();

  static Wrench zero() { return {}; }
  static Wrench of(double fx, double fy) { return Wrench{Vec2(fx, fy)}; }
  bool is_zero() const { return force.isZero(0.0); }
  bool operator==(const Wrench& other) const { return force == other.force; }
};

// Geometric deviations from the nominal model, ordered (d_l1, d_l2, d_q1,
// d_q2).
struct GeomParams {
  double d_l1 = 0.0;
  double d_l2 = 0.0;
  double d_q1 = 0.0;
  double d_q2 = 0.0;

  Eigen::Vector4d as_vector() const { return {d_l1, d_l2, d_q1, d_q2}; }
};

// Lumped joint compliances k_i.
struct ComplianceParams {
  Vec2 k = Vec2::Zero();
};

Vec2 forward_kinematics(const PlanarArmModel& model, const JointConfig& q);

// Column i is the partial derivative of the end-effector position with
// respect to q_i. Singular configurations are returned as-is.
Mat2 jacobian(const PlanarArmModel& model, const JointConfig& q);

// Maps (d_l1, d_l2, d_q1, d_q2) to end-effector displacement:
// [u1 | u12 | J], where u1 and u12 are the unit link directions.
Mat24 geometric_identification_jacobian(const PlanarArmModel& model,
                                        const JointConfig& q);

// Compliance observation matrix. Column i is J_i * (J_i^T f), so that
// A * k == J * diag(k) * J^T * f for any compliance vector k.
Mat2 amatrix(const PlanarArmModel& model, const JointConfig& q,
             const Wrench& f);

enum class ElbowBranch { kUp, kDown };

// Closed-form inverse kinematics. kUp gives q2 >= 0.
// Throws UnreachableTarget outside min_reach() <= |target| <= max_reach().
JointConfig inverse_kinematics(const PlanarArmModel& model, const Vec2& target,
                               ElbowBranch branch = ElbowBranch::kUp);

}  // namespace posecal

#endif  // POSECAL_MANIP_H_
