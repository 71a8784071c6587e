// Copyright 2026 The hrc-safety Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hrc/kinematics.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "hrc/error.h"
#include "hrc/robot_presets.h"
#include "oracles.h"

namespace hrc {
namespace {

constexpr double kHalfPi = 1.5707963267948966;

TEST(ForwardKinematics, StraightPlanarArm) {
  const RobotModel arm = planar_2r();
  const KinematicState fk = forward_kinematics(arm, JointVector::Zero(2));
  ASSERT_EQ(fk.capsules.size(), 2u);
  EXPECT_TRUE(fk.capsules[1].axis.b.isApprox(Vec3(2, 0, 0), 1e-12));
}

TEST(ForwardKinematics, RotatedPlanarArm) {
  const RobotModel arm = planar_2r();
  const KinematicState fk =
      forward_kinematics(arm, (JointVector(2) << kHalfPi, 0.0).finished());
  EXPECT_LT((fk.capsules[1].axis.b - Vec3(0, 2, 0)).norm(), 1e-12);
}

TEST(ForwardKinematics, MatchesMatrixProducts) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 50; ++k) {
    const RobotModel model = fixture::random_model(rng, 6);
    const JointVector q = fixture::random_q(rng, model);
    const KinematicState fk = forward_kinematics(model, q);
    for (std::size_t i = 0; i < model.dof(); ++i) {
      const Vec3 expected =
          oracle::link_point(model, q, i, model.joint(i).capsule.axis.b);
      EXPECT_LT((fk.capsules[i].axis.b - expected).norm(), 1e-12);
    }
  }
}

TEST(ForwardKinematics, WrongSizeThrows) {
  EXPECT_THROW(forward_kinematics(planar_2r(), JointVector::Zero(3)),
               PreconditionError);
}

TEST(LinkJacobian, PlanarRows) {
  const LinkJacobian j = link_jacobian(planar_2r(), JointVector::Zero(2), 1);
  ASSERT_EQ(j.matrix.rows(), 6);
  ASSERT_EQ(j.matrix.cols(), 2);
  EXPECT_NEAR(j.matrix(1, 0), 2.0, 1e-12);
  EXPECT_NEAR(j.matrix(1, 1), 1.0, 1e-12);
  EXPECT_NEAR(j.matrix(0, 0), 0.0, 1e-12);
  EXPECT_NEAR(j.matrix(0, 1), 0.0, 1e-12);
  const Eigen::MatrixXd fd = oracle::fd_point_jacobian(
      planar_2r(), JointVector::Zero(2), 1, Vec3(1, 0, 0));
  EXPECT_NEAR(fd(1, 0), 2.0, 1e-8);
  EXPECT_NEAR(fd(1, 1), 1.0, 1e-8);
}

TEST(LinkJacobian, OutOfRangeThrows) {
  EXPECT_THROW(link_jacobian(planar_2r(), JointVector::Zero(2), 2),
               PreconditionError);
}

TEST(LinkJacobian, ChainPrefix) {
  std::mt19937_64 rng(9);
  const RobotModel model = fixture::random_model(rng, 6);
  const JointVector q = fixture::random_q(rng, model);
  const KinematicState fk = forward_kinematics(model, q);
  const Vec3 p = fixture::random_vec(rng, -1, 1);
  const Jacobian full = point_jacobian(model, fk, 5, p);
  for (std::size_t i = 0; i < 6; ++i) {
    const Jacobian part = point_jacobian(model, fk, i, p);
    ASSERT_EQ(part.cols(), static_cast<Eigen::Index>(i + 1));
    EXPECT_TRUE(part.isApprox(full.leftCols(part.cols()), 1e-14));
  }
}

TEST(LinkJacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 100; ++k) {
    const RobotModel model = fixture::random_model(rng, 6);
    const JointVector q = fixture::random_q(rng, model);
    for (std::size_t i = 0; i < model.dof(); ++i) {
      const LinkJacobian j = link_jacobian(model, q, i);
      const auto cols = j.matrix.cols();
      Eigen::MatrixXd fd(6, cols);
      fd.topRows(3) = oracle::fd_point_jacobian(
                          model, q, i, model.joint(i).capsule.axis.b)
                          .leftCols(cols);
      fd.bottomRows(3) = oracle::fd_angular_jacobian(model, q, i).leftCols(cols);
      EXPECT_LE((j.matrix - fd).cwiseAbs().maxCoeff(),
                1e-5 * std::max(1.0, fd.cwiseAbs().maxCoeff()));
      // Joints past i do not move link i.
      if (cols == static_cast<Eigen::Index>(model.dof())) continue;
      const Eigen::MatrixXd rest =
          oracle::fd_point_jacobian(model, q, i, model.joint(i).capsule.axis.b)
              .rightCols(static_cast<Eigen::Index>(model.dof()) - cols);
      EXPECT_LE(rest.cwiseAbs().maxCoeff(), 1e-8);
    }
  }
}

TEST(ModifiedJacobian, PlanarTowardHuman) {
  const RobotModel arm = planar_2r();
  const Eigen::RowVectorXd y =
      modified_jacobian(arm, JointVector::Zero(2), 1, Vec3::UnitY());
  EXPECT_NEAR(y[0], 2.0, 1e-12);
  EXPECT_NEAR(y[1], 1.0, 1e-12);
  const Eigen::RowVectorXd x =
      modified_jacobian(arm, JointVector::Zero(2), 1, Vec3::UnitX());
  EXPECT_NEAR(x.cwiseAbs().maxCoeff(), 0.0, 1e-12);
}

TEST(ModifiedJacobian, FirstLinkIsPadded) {
  const Eigen::RowVectorXd row =
      modified_jacobian(planar_2r(), JointVector::Zero(2), 0, Vec3::UnitY());
  ASSERT_EQ(row.size(), 2);
  EXPECT_NEAR(row[0], 1.0, 1e-12);
  EXPECT_EQ(row[1], 0.0);
}

TEST(ModifiedJacobian, PaddingAndLinearity) {
  std::mt19937_64 rng(33);
  for (int k = 0; k < 50; ++k) {
    const RobotModel model = fixture::random_model(rng, 6);
    const JointVector q = fixture::random_q(rng, model);
    const Vec3 n1 = fixture::random_vec(rng, -1, 1).normalized();
    const Vec3 n2 = fixture::random_vec(rng, -1, 1).normalized();
    const Vec3 n3 = (n1 + n2).normalized();
    for (std::size_t i = 0; i < 6; ++i) {
      const Eigen::RowVectorXd r1 = modified_jacobian(model, q, i, n1);
      const Eigen::RowVectorXd r2 = modified_jacobian(model, q, i, n2);
      const Eigen::RowVectorXd r3 = modified_jacobian(model, q, i, n3);
      for (Eigen::Index c = static_cast<Eigen::Index>(i) + 1; c < 6; ++c) {
        EXPECT_EQ(r1[c], 0.0);
      }
      const double scale = (n1 + n2).norm();
      EXPECT_LT((r3 * scale - (r1 + r2)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(ModifiedJacobian, RejectsNonUnitDirection) {
  EXPECT_THROW(modified_jacobian(planar_2r(), JointVector::Zero(2), 1,
                                 Vec3(0, 2, 0)),
               PreconditionError);
}

TEST(RobotModel, RejectsBadLimits) {
  JointSpec j;
  j.qdot_min = 0.5;
  EXPECT_THROW(RobotModel({j}), ConfigError);
  JointSpec k;
  k.axis = Vec3::Zero();
  EXPECT_THROW(RobotModel({k}), ConfigError);
}

TEST(Prbt6, ReferencePoseIsWithinLimits) {
  const RobotModel robot = prbt6();
  const JointVector qs =
      (JointVector(6) << 1.57, -0.4, 1.17, 0.0, 1.57, 0.0).finished();
  EXPECT_TRUE(robot.within_limits(qs));
  JointVector qg = qs;
  qg[0] = -1.57;
  EXPECT_TRUE(robot.within_limits(qg));
}

}  // namespace
}  // namespace hrc
