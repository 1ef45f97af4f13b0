#pragma once

// Parametric right hand: a 21-joint kinematic tree (wrist + 5 fingers of
// 4 joints each), a log-linear bone-scale shape basis, and forward kinematics
// from axis-angle pose parameters to world-space joints.
//
// Joint order: 0 wrist; thumb 1-4, index 5-8, middle 9-12, ring 13-16,
// pinky 17-20. Within a finger: MCP, PIP, DIP, TIP. Fingertips carry no
// rotation, leaving 15 articulated joints.
//
// Everything that participates in the optimized objective is templated on
// the scalar so it runs on both `double` and `ad::Var`.

#include <array>
#include <cmath>
#include <string>

#include <Eigen/Core>

#include "handsmooth/autodiff.hpp"
#include "handsmooth/errors.hpp"

namespace handsmooth {

inline constexpr int kNumJoints = 21;
inline constexpr int kNumArticulated = 15;
inline constexpr int kNumShape = 10;
inline constexpr int kNumFingers = 5;

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Matrix3 = Eigen::Matrix<Scalar, 3, 3>;

// One row per joint, xyz in meters.
template <typename Scalar>
using Joints = Eigen::Matrix<Scalar, kNumJoints, 3, Eigen::RowMajor>;

template <typename Scalar>
using ShapeVector = Eigen::Matrix<Scalar, kNumShape, 1>;
using ShapeParams = ShapeVector<double>;

// Articulated slot k -> joint index, and its inverse (-1 for wrist / tips).
inline constexpr std::array<int, kNumArticulated> kArticulatedJoints = {
    1, 2, 3, 5, 6, 7, 9, 10, 11, 13, 14, 15, 17, 18, 19};
inline constexpr std::array<int, kNumJoints> kArticulatedSlot = {
    -1, 0, 1, 2, -1, 3, 4, 5, -1, 6, 7, 8, -1, 9, 10, 11, -1, 12, 13, 14, -1};

inline constexpr bool is_fingertip(int joint) { return joint > 0 && joint % 4 == 0; }

struct HandSkeleton {
  std::string version = "right_hand_v1";
  std::array<int, kNumJoints> parent{};
  Eigen::Matrix<double, kNumJoints, 3, Eigen::RowMajor> rest_offset =
      Eigen::Matrix<double, kNumJoints, 3, Eigen::RowMajor>::Zero();
  Eigen::Matrix<double, kNumJoints, kNumShape, Eigen::RowMajor> shape_basis =
      Eigen::Matrix<double, kNumJoints, kNumShape, Eigen::RowMajor>::Zero();

  // Flat right hand, fingers along +y, palm normal +z, thumb towards +x.
  // Median adult proportions, meters.
  static HandSkeleton right_hand();

  // Throws InvalidArgument unless the tree is the 5x4 finger layout, parents
  // are topologically sorted, and offsets / basis are finite and usable.
  void validate() const;

  bool operator==(const HandSkeleton&) const = default;
};

template <typename Scalar>
struct FramePose {
  Vector3<Scalar> global_orient = Vector3<Scalar>::Zero();
  Vector3<Scalar> position = Vector3<Scalar>::Zero();
  Eigen::Matrix<Scalar, kNumArticulated, 3, Eigen::RowMajor> joint_rotations =
      Eigen::Matrix<Scalar, kNumArticulated, 3, Eigen::RowMajor>::Zero();

  bool operator==(const FramePose&) const = default;
};

template <typename Scalar>
Matrix3<Scalar> skew(const Vector3<Scalar>& v) {
  Matrix3<Scalar> k;
  k << Scalar(0.0), -v.z(), v.y(),
       v.z(), Scalar(0.0), -v.x(),
       -v.y(), v.x(), Scalar(0.0);
  return k;
}

// Rodrigues. Below 1e-8 rad the first-order series I + [aa]x is used, so no
// division by the angle happens near the origin.
template <typename Scalar>
Matrix3<Scalar> axis_angle_to_matrix(const Vector3<Scalar>& aa) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  if (!std::isfinite(ad::value(aa.x())) || !std::isfinite(ad::value(aa.y())) ||
      !std::isfinite(ad::value(aa.z()))) {
    throw InvalidArgument("axis_angle_to_matrix: non-finite axis-angle");
  }
  const Scalar theta2 = aa.squaredNorm();
  if (ad::value(theta2) < 1e-16) {
    return Matrix3<Scalar>::Identity() + skew(aa);
  }
  const Scalar theta = sqrt(theta2);
  const Matrix3<Scalar> k = skew<Scalar>(aa / theta);
  return Matrix3<Scalar>::Identity() + sin(theta) * k + (Scalar(1.0) - cos(theta)) * (k * k);
}

// Inverse of `axis_angle_to_matrix`, angle in [0, pi].
Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rotation);

// Same rotation with the angle wrapped into (-pi, pi] along the original axis.
Eigen::Vector3d canonicalize_axis_angle(const Eigen::Vector3d& aa);

// Per-joint bone scale exp(B[j] . beta).
template <typename Scalar>
Eigen::Matrix<Scalar, kNumJoints, 1> bone_scales(const HandSkeleton& skeleton,
                                                 const ShapeVector<Scalar>& beta) {
  using std::exp;
  Eigen::Matrix<Scalar, kNumJoints, 1> s;
  for (int j = 0; j < kNumJoints; ++j) {
    Scalar dot(0.0);
    for (int k = 0; k < kNumShape; ++k) dot += skeleton.shape_basis(j, k) * beta[k];
    s[j] = exp(dot);
  }
  return s;
}

// Rest offsets scaled by `bone_scales`; beta = 0 returns the input.
HandSkeleton apply_shape(const HandSkeleton& skeleton, const ShapeParams& beta);

template <typename Scalar>
Joints<Scalar> forward_kinematics(const HandSkeleton& skeleton, const ShapeVector<Scalar>& beta,
                                  const FramePose<Scalar>& pose) {
  const Eigen::Matrix<Scalar, kNumJoints, 1> scale = bone_scales(skeleton, beta);

  std::array<Matrix3<Scalar>, kNumJoints> world_rotation;
  Joints<Scalar> joints;
  world_rotation[0] = axis_angle_to_matrix<Scalar>(pose.global_orient);
  joints.row(0) = pose.position.transpose();

  for (int j = 1; j < kNumJoints; ++j) {
    const int p = skeleton.parent[j];
    const Vector3<Scalar> offset =
        scale[j] * skeleton.rest_offset.row(j).transpose().template cast<Scalar>();
    const Vector3<Scalar> parent_pos = joints.row(p).transpose();
    joints.row(j) = (parent_pos + world_rotation[p] * offset).transpose();
    const int slot = kArticulatedSlot[j];
    if (slot >= 0) {
      const Vector3<Scalar> local = pose.joint_rotations.row(slot).transpose();
      world_rotation[j] = world_rotation[p] * axis_angle_to_matrix<Scalar>(local);
    }
  }
  return joints;
}

inline Joints<double> forward_kinematics(const HandSkeleton& skeleton, const FramePose<double>& pose) {
  return forward_kinematics<double>(skeleton, ShapeParams::Zero(), pose);
}

// Euclidean distance from every non-root joint to its parent.
Eigen::Matrix<double, kNumJoints, 1> bone_lengths(const HandSkeleton& skeleton,
                                                  const Joints<double>& joints);

}  // namespace handsmooth
