#include "handsmooth/camera.hpp"

#include <Eigen/Geometry>

namespace handsmooth {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw InvalidArgument("intrinsics: focal lengths must be positive");
  if (!(width > 0.0) || !(height > 0.0)) throw InvalidArgument("intrinsics: image size must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw InvalidArgument("intrinsics: non-finite value");
  }
}

void Extrinsics::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InvalidArgument("extrinsics: non-finite value");
  }
  const double ortho = (rotation.transpose() * rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-9 || std::abs(rotation.determinant() - 1.0) > 1e-9) {
    throw InvalidArgument("extrinsics: rotation is not a proper rotation");
  }
}

void CameraRig::validate() const {
  if (views.empty()) throw InvalidArgument("rig: at least one view required");
  for (const Camera& c : views) {
    c.intrinsics.validate();
    c.extrinsics.validate();
  }
}

Eigen::Vector3d back_project(const Eigen::Vector2d& uv, double depth, const Camera& cam) {
  const Intrinsics& in = cam.intrinsics;
  const Eigen::Vector3d p_cam((uv.x() - in.cx) / in.fx * depth, (uv.y() - in.cy) / in.fy * depth, depth);
  return cam.extrinsics.rotation.transpose() * (p_cam - cam.extrinsics.translation);
}

Extrinsics look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target, const Eigen::Vector3d& up) {
  const Eigen::Vector3d forward = target - eye;
  if (!(forward.norm() > 0.0)) throw InvalidArgument("look_at: eye and target coincide");
  const Eigen::Vector3d z = forward.normalized();
  const Eigen::Vector3d x_raw = (-up).cross(z);
  if (!(x_raw.norm() > 1e-12)) throw InvalidArgument("look_at: view direction parallel to up");
  const Eigen::Vector3d x = x_raw.normalized();
  const Eigen::Vector3d y = z.cross(x);

  Extrinsics ext;
  ext.rotation.row(0) = x.transpose();
  ext.rotation.row(1) = y.transpose();
  ext.rotation.row(2) = z.transpose();
  ext.translation = -ext.rotation * eye;
  return ext;
}

Eigen::Vector3d camera_center(const Extrinsics& ext) { return -ext.rotation.transpose() * ext.translation; }

Extrinsics perturb_extrinsics(const Extrinsics& ext, Rng& rng, double range) {
  if (!(range >= 0.0) || !std::isfinite(range)) {
    throw InvalidArgument("perturb_extrinsics: range must be finite and non-negative");
  }
  Extrinsics out = ext;
  if (range == 0.0) return out;
  std::uniform_real_distribution<double> uniform(-range, range);
  for (int i = 0; i < 3; ++i) {
    double u = uniform(rng);
    while (u <= -range || u >= range) u = uniform(rng);
    out.translation[i] += u;
  }
  return out;
}

CameraRig perturb_rig(const CameraRig& rig, Rng& rng, double range) {
  CameraRig out = rig;
  for (Camera& c : out.views) c.extrinsics = perturb_extrinsics(c.extrinsics, rng, range);
  return out;
}

}  // namespace handsmooth
