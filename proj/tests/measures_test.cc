#include "posecal/measures.h"

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <gtest/gtest.h>

#include "posecal/errors.h"
#include "test_util.h"

namespace posecal {
namespace {

using testing::kArm;
using testing::kCuttingForce;
using testing::random_config;
using testing::random_plan;
using testing::relative_error;

const NoiseSpec kNoise(0.1);

TestPose cutting_pose(std::mt19937_64& gen) {
  return {random_config(gen), kCuttingForce};
}

// Laplace expansion along the first row.
double cofactor_determinant(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  if (n == 1) return m(0, 0);
  double det = 0.0;
  for (int col = 0; col < n; ++col) {
    Eigen::MatrixXd minor(n - 1, n - 1);
    for (int r = 1; r < n; ++r) {
      for (int c = 0, k = 0; c < n; ++c) {
        if (c != col) minor(r - 1, k++) = m(r, c);
      }
    }
    det += (col % 2 == 0 ? 1.0 : -1.0) * m(0, col) * cofactor_determinant(minor);
  }
  return det;
}

TEST(CriterionTest, NamesRoundTrip) {
  for (Criterion c : {Criterion::kEtaSingle, Criterion::kEtaMinMax,
                      Criterion::kDOptimality, Criterion::kSvdObservability}) {
    EXPECT_EQ(parse_criterion(to_string(c)), c);
  }
  EXPECT_EQ(parse_criterion("test_pose"), Criterion::kEtaMinMax);
  EXPECT_EQ(parse_criterion("svd"), Criterion::kSvdObservability);
  EXPECT_EQ(parse_criterion("d_opt"), Criterion::kDOptimality);
  EXPECT_FALSE(parse_criterion("a_optimality"));
  EXPECT_TRUE(is_maximized(Criterion::kDOptimality));
  EXPECT_FALSE(is_maximized(Criterion::kEtaMinMax));
}

TEST(EtaSingleTest, RepetitionDividesEta) {
  const Plan plan({{JointConfig(-1.1, 1.4), kCuttingForce}});
  const TestPose test{JointConfig(2.0, 1.0), kCuttingForce};
  const double one =
      eta_single(CalibCase::kElastoStatic, kArm, plan, test, kNoise);
  const double five = eta_single(CalibCase::kElastoStatic, kArm,
                                 plan.repeated(5), test, kNoise);
  EXPECT_LE(relative_error(five * 5.0, one), 1e-12);
  EXPECT_NEAR(std::sqrt(one) / std::sqrt(five), std::sqrt(5.0), 1e-12);
}

TEST(EtaSingleTest, UnloadedTestPoseHasNoError) {
  std::mt19937_64 gen(31);
  const Plan plan = random_plan(gen, 3, true);
  const TestPose test{JointConfig(0.5, 0.5), Wrench::zero()};
  EXPECT_EQ(eta_single(CalibCase::kElastoStatic, kArm, plan, test, kNoise),
            0.0);
}

TEST(EtaSingleTest, PropagatesSingularInformation) {
  const Plan plan({{JointConfig(0.2, 0.9), Wrench::zero()}});
  const TestPose test{JointConfig(0.5, 0.5), Wrench::zero()};
  EXPECT_THROW(eta_single(CalibCase::kGeometric, kArm, plan, test, kNoise),
               SingularInformation);
}

TEST(EtaSingleTest, EqualsTraceOfPropagatedCovariance) {
  std::mt19937_64 gen(32);
  for (CalibCase c : {CalibCase::kGeometric, CalibCase::kElastoStatic,
                      CalibCase::kCombined}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Plan plan = random_plan(gen, 5);
      const TestPose test{random_config(gen), testing::random_wrench(gen)};
      const Eigen::MatrixXd cov =
          covariance(information_matrix(c, kArm, plan), kNoise).matrix;
      const Eigen::MatrixXd b0 = build_b(c, kArm, test.q0, test.f0);
      const double oracle = (b0 * cov * b0.transpose()).trace();
      EXPECT_LE(relative_error(eta_single(c, kArm, plan, test, kNoise), oracle),
                1e-10);
    }
  }
}

TEST(EtaSingleTest, ForceScaling) {
  std::mt19937_64 gen(33);
  const double alpha = 3.0;
  const double beta = 0.5;
  for (int trial = 0; trial < 20; ++trial) {
    const Plan plan = random_plan(gen, 3);
    const TestPose test{random_config(gen), testing::random_wrench(gen)};
    std::vector<Experiment> scaled;
    for (const Experiment& e : plan.experiments()) {
      scaled.push_back({e.q, Wrench{alpha * e.f.force}});
    }
    const double base =
        eta_single(CalibCase::kElastoStatic, kArm, plan, test, kNoise);
    const double moved = eta_single(CalibCase::kElastoStatic, kArm,
                                    Plan(scaled),
                                    {test.q0, Wrench{beta * test.f0.force}},
                                    kNoise);
    EXPECT_LE(relative_error(moved, base * (beta / alpha) * (beta / alpha)),
              1e-10);
  }
}

TEST(EtaSingleTest, AddingExperimentsNeverHurts) {
  std::mt19937_64 gen(34);
  for (CalibCase c : {CalibCase::kElastoStatic, CalibCase::kCombined}) {
    for (int trial = 0; trial < 50; ++trial) {
      const Plan plan = random_plan(gen, 4);
      const TestPose test{random_config(gen), testing::random_wrench(gen)};
      const Experiment extra{random_config(gen), testing::random_wrench(gen)};
      const double before = eta_single(c, kArm, plan, test, kNoise);
      const double after = eta_single(c, kArm, plan.with(extra), test, kNoise);
      EXPECT_LE(after, before * (1.0 + 1e-10));
    }
  }
}

TEST(EtaMinMaxTest, SinglePoseSetEqualsEtaSingle) {
  std::mt19937_64 gen(35);
  const Plan plan = random_plan(gen, 2, true);
  const TestPose test = cutting_pose(gen);
  const MeasureReport r = eta_minmax(CalibCase::kElastoStatic, kArm, plan,
                                     TestPoseSet({test}), kNoise);
  EXPECT_DOUBLE_EQ(
      r.eta_max, eta_single(CalibCase::kElastoStatic, kArm, plan, test, kNoise));
  EXPECT_EQ(r.argmax, 0);
  EXPECT_DOUBLE_EQ(r.rms_per_pose[0], std::sqrt(r.eta_max));
}

TEST(EtaMinMaxTest, DuplicatedPoseLeavesMaximumUnchanged) {
  std::mt19937_64 gen(36);
  const Plan plan = random_plan(gen, 3, true);
  std::vector<TestPose> poses = {cutting_pose(gen), cutting_pose(gen),
                                 cutting_pose(gen)};
  const MeasureReport base = eta_minmax(CalibCase::kElastoStatic, kArm, plan,
                                        TestPoseSet(poses), kNoise);
  poses.push_back(poses[base.argmax]);
  poses.push_back(poses[0]);
  const MeasureReport dup = eta_minmax(CalibCase::kElastoStatic, kArm, plan,
                                       TestPoseSet(poses), kNoise);
  EXPECT_EQ(dup.eta_max, base.eta_max);
}

TEST(EtaMinMaxTest, MaximumDominatesEveryNode) {
  std::mt19937_64 gen(37);
  for (int trial = 0; trial < 20; ++trial) {
    const Plan plan = random_plan(gen, 4, true);
    std::vector<TestPose> poses;
    for (int j = 0; j < 10; ++j) poses.push_back(cutting_pose(gen));
    const MeasureReport r = eta_minmax(CalibCase::kElastoStatic, kArm, plan,
                                       TestPoseSet(poses), kNoise);
    ASSERT_EQ(r.eta_per_pose.size(), 10u);
    for (double eta : r.eta_per_pose) {
      EXPECT_GE(r.eta_max, eta);
      EXPECT_GE(eta, 0.0);
    }
    EXPECT_EQ(r.eta_max, r.eta_per_pose[r.argmax]);
  }
}

TEST(TestPoseSetTest, RejectsEmpty) {
  EXPECT_THROW(TestPoseSet({}), std::invalid_argument);
}

TEST(DOptimalityTest, SingularPlanScoresZero) {
  const Plan plan({{JointConfig(0.2, 0.9), Wrench::zero()}});
  EXPECT_EQ(d_optimality(CalibCase::kGeometric, kArm, plan), 0.0);
  EXPECT_EQ(d_optimality(CalibCase::kElastoStatic, kArm, plan), 0.0);
}

TEST(DOptimalityTest, RepetitionScalesByPowerOfDimension) {
  std::mt19937_64 gen(38);
  const Plan plan = random_plan(gen, 3);
  for (CalibCase c : {CalibCase::kGeometric, CalibCase::kElastoStatic,
                      CalibCase::kCombined}) {
    const double p = parameter_dimension(c);
    const double one = d_optimality(c, kArm, plan);
    EXPECT_LE(relative_error(d_optimality(c, kArm, plan.repeated(4)),
                             std::pow(4.0, p) * one),
              1e-9);
  }
}

TEST(DOptimalityTest, MatchesCofactorExpansion) {
  std::mt19937_64 gen(39);
  for (CalibCase c : {CalibCase::kGeometric, CalibCase::kElastoStatic,
                      CalibCase::kCombined}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Plan plan = random_plan(gen, 5);
      const double oracle =
          cofactor_determinant(information_matrix(c, kArm, plan).matrix());
      EXPECT_LE(relative_error(d_optimality(c, kArm, plan), oracle), 1e-9);
    }
  }
}

TEST(SvdObservabilityTest, SingularPlanScoresZero) {
  const Plan plan({{JointConfig(0.2, 0.9), Wrench::zero()}});
  EXPECT_EQ(svd_observability(CalibCase::kGeometric, kArm, plan), 0.0);
}

TEST(SvdObservabilityTest, IdentityPaddedStackHasUnitMinimum) {
  Eigen::MatrixXd stacked = Eigen::MatrixXd::Zero(6, 4);
  stacked.topRows(4).setIdentity();
  EXPECT_DOUBLE_EQ(
      svd_observability(InfoMatrix(stacked.transpose() * stacked)), 1.0);
}

TEST(SvdObservabilityTest, MatchesSvdOfStackedMatrix) {
  std::mt19937_64 gen(40);
  for (CalibCase c : {CalibCase::kGeometric, CalibCase::kElastoStatic,
                      CalibCase::kCombined}) {
    for (int trial = 0; trial < 10; ++trial) {
      const Plan plan = random_plan(gen, 5);
      const int p = parameter_dimension(c);
      Eigen::MatrixXd stacked(2 * plan.size(), p);
      for (int i = 0; i < plan.size(); ++i) {
        stacked.middleRows(2 * i, 2) = build_b(c, kArm, plan[i].q, plan[i].f);
      }
      const double oracle =
          Eigen::JacobiSVD<Eigen::MatrixXd>(stacked).singularValues()(p - 1);
      const double got = svd_observability(c, kArm, plan);
      // lambda_min of the information matrix loses relative accuracy when the
      // problem is badly conditioned (combined case); compare squares against
      // the spread of the spectrum.
      const double top =
          Eigen::JacobiSVD<Eigen::MatrixXd>(stacked).singularValues()(0);
      EXPECT_LE(std::abs(got * got - oracle * oracle),
                std::max(1e-9 * oracle * oracle, 1e-14 * top * top))
          << to_string(c);
    }
  }
}

TEST(SvdObservabilityTest, SquareEqualsMinimumEigenvalue) {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Plan plan = random_plan(gen, 5, true);
    const InfoMatrix info =
        information_matrix(CalibCase::kElastoStatic, kArm, plan);
    const Eigen::Matrix2d m = info.matrix();
    // Closed-form smaller root of the 2x2 characteristic polynomial.
    const double tr = m.trace();
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    const double lambda_min = 2.0 * det / (tr + std::sqrt(tr * tr - 4.0 * det));
    const double s = svd_observability(info);
    EXPECT_LE(relative_error(s * s, lambda_min), 1e-9);
  }
}

}  // namespace
}  // namespace posecal
