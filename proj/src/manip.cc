#include "posecal/manip.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

#include "posecal/errors.h"

namespace posecal {

double normalize_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::remainder(angle, kTwoPi);  // [-pi, pi]
  if (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

PlanarArmModel::PlanarArmModel(double l1_mm, double l2_mm)
    : l1_(l1_mm), l2_(l2_mm) {
  if (!(std::isfinite(l1_) && std::isfinite(l2_) && l1_ > 0.0 && l2_ > 0.0)) {
    throw std::invalid_argument(
        fmt::format("link lengths must be positive, got l1={} l2={}", l1_, l2_));
  }
}

double PlanarArmModel::min_reach() const { return std::abs(l1_ - l2_); }

JointConfig::JointConfig(double q1, double q2) {
  if (!std::isfinite(q1) || !std::isfinite(q2)) {
    throw std::invalid_argument("joint angles must be finite");
  }
  q_ = Vec2(normalize_angle(q1), normalize_angle(q2));
}

Vec2 forward_kinematics(const PlanarArmModel& model, const JointConfig& q) {
  const double q12 = q.q1() + q.q2();
  return {model.l1() * std::cos(q.q1()) + model.l2() * std::cos(q12),
          model.l1() * std::sin(q.q1()) + model.l2() * std::sin(q12)};
}

Mat2 jacobian(const PlanarArmModel& model, const JointConfig& q) {
  const double s1 = std::sin(q.q1());
  const double c1 = std::cos(q.q1());
  const double s12 = std::sin(q.q1() + q.q2());
  const double c12 = std::cos(q.q1() + q.q2());
  Mat2 j;
  j << -model.l1() * s1 - model.l2() * s12, -model.l2() * s12,
      model.l1() * c1 + model.l2() * c12, model.l2() * c12;
  return j;
}

Mat24 geometric_identification_jacobian(const PlanarArmModel& model,
                                        const JointConfig& q) {
  const double q12 = q.q1() + q.q2();
  Mat24 g;
  g.col(0) << std::cos(q.q1()), std::sin(q.q1());
  g.col(1) << std::cos(q12), std::sin(q12);
  g.rightCols<2>() = jacobian(model, q);
  return g;
}

Mat2 amatrix(const PlanarArmModel& model, const JointConfig& q,
             const Wrench& f) {
  const Mat2 j = jacobian(model, q);
  Mat2 a;
  for (int i = 0; i < PlanarArmModel::kJoints; ++i) {
    a.col(i) = j.col(i) * j.col(i).dot(f.force);
  }
  return a;
}

JointConfig inverse_kinematics(const PlanarArmModel& model, const Vec2& target,
                               ElbowBranch branch) {
  const double l1 = model.l1();
  const double l2 = model.l2();
  const double r2 = target.squaredNorm();
  const double r = std::sqrt(r2);
  // Small slack so that exact boundary points (e.g. fully stretched) pass.
  const double slack = 1e-12 * model.max_reach();
  if (!std::isfinite(r) || r < model.min_reach() - slack ||
      r > model.max_reach() + slack) {
    throw UnreachableTarget(
        target.x(), target.y(),
        fmt::format("target ({}, {}) mm at radius {} is outside the reachable "
                    "annulus [{}, {}]",
                    target.x(), target.y(), r, model.min_reach(),
                    model.max_reach()));
  }
  const double c2 = std::clamp((r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2),
                               -1.0, 1.0);
  double s2 = std::sqrt((1.0 - c2) * (1.0 + c2));
  if (branch == ElbowBranch::kDown) s2 = -s2;
  const double q2 = std::atan2(s2, c2);
  const double q1 =
      std::atan2(target.y(), target.x()) - std::atan2(l2 * s2, l1 + l2 * c2);
  return JointConfig(q1, q2);
}

}  // namespace posecal
