#pragma once

// Pinhole multi-view rig. Extrinsics map world -> camera:
// p_cam = R * p_world + t. No lens distortion.

#include <random>
#include <vector>

#include <Eigen/Core>

#include "handsmooth/autodiff.hpp"
#include "handsmooth/errors.hpp"
#include "handsmooth/hand_model.hpp"

namespace handsmooth {

// Points closer than this to the principal plane are not projectable.
inline constexpr double kMinDepth = 1e-6;

using Rng = std::mt19937_64;

struct Intrinsics {
  double fx = 500.0;
  double fy = 500.0;
  double cx = 320.0;
  double cy = 240.0;
  double width = 640.0;
  double height = 480.0;

  void validate() const;
  bool operator==(const Intrinsics&) const = default;
};

struct Extrinsics {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  void validate() const;
  bool operator==(const Extrinsics&) const = default;
};

struct Camera {
  Intrinsics intrinsics;
  Extrinsics extrinsics;

  bool operator==(const Camera&) const = default;
};

struct CameraRig {
  std::vector<Camera> views;

  int num_views() const { return static_cast<int>(views.size()); }
  void validate() const;
  bool operator==(const CameraRig&) const = default;
};

template <typename Scalar>
Vector3<Scalar> to_camera(const Vector3<Scalar>& point_world, const Extrinsics& ext) {
  return ext.rotation * point_world + ext.translation;
}

// Perspective division without a depth check; callers that may see points
// behind the camera test the depth first.
template <typename Scalar>
Vector2<Scalar> project_camera_point(const Vector3<Scalar>& p_cam, const Intrinsics& in) {
  const Scalar inv_z = Scalar(1.0) / p_cam.z();
  return Vector2<Scalar>(in.fx * p_cam.x() * inv_z + in.cx, in.fy * p_cam.y() * inv_z + in.cy);
}

// uv may fall outside the image; only the depth is checked.
template <typename Scalar>
Vector2<Scalar> project(const Vector3<Scalar>& point_world, const Camera& cam) {
  if (!std::isfinite(ad::value(point_world.x())) || !std::isfinite(ad::value(point_world.y())) ||
      !std::isfinite(ad::value(point_world.z()))) {
    throw InvalidArgument("project: non-finite point");
  }
  const Vector3<Scalar> p_cam = to_camera<Scalar>(point_world, cam.extrinsics);
  if (!(ad::value(p_cam.z()) > kMinDepth)) throw BehindCamera("project: point behind camera");
  return project_camera_point<Scalar>(p_cam, cam.intrinsics);
}

// World point on the pixel's ray at camera depth `depth`.
Eigen::Vector3d back_project(const Eigen::Vector2d& uv, double depth, const Camera& cam);

// Camera at `eye` looking at `target`; image y points along -up.
Extrinsics look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                   const Eigen::Vector3d& up = Eigen::Vector3d::UnitY());

// Camera centre in world coordinates, -R^T t.
Eigen::Vector3d camera_center(const Extrinsics& ext);

// Adds independent Uniform(-range, range) noise to each translation
// component (meters). Rotation is untouched. Values equal to -range are
// redrawn so the interval is open on both sides.
Extrinsics perturb_extrinsics(const Extrinsics& ext, Rng& rng, double range = 0.5);

// `perturb_extrinsics` applied to every view in order.
CameraRig perturb_rig(const CameraRig& rig, Rng& rng, double range = 0.5);

}  // namespace handsmooth
