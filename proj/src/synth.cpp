#include "handsmooth/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace handsmooth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

Eigen::Vector3d evaluate(const Sinusoid& s, double time) {
  const double angle = 2.0 * kPi * s.frequency_hz * time + s.phase;
  return s.base + s.amplitude * std::sin(angle);
}

Eigen::Vector3d wrist_position(const WristPath& path, double time) {
  if (path.kind == WristPath::Kind::line) {
    if (path.speed == 0.0) return path.start;
    return path.start + path.direction.normalized() * (path.speed * time);
  }
  if (path.speed == 0.0) return path.start + Eigen::Vector3d(path.radius, 0.0, 0.0);
  const double angle = path.speed / path.radius * time;
  return path.start + Eigen::Vector3d(path.radius * std::cos(angle), path.radius * std::sin(angle), 0.0);
}

bool finite3(const Eigen::Vector3d& v) { return v.allFinite(); }

}  // namespace

void MotionSpec::validate() const {
  if (num_frames < 3) throw SpecError("motion: num_frames must be at least 3");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw SpecError("motion: fps must be positive");
  for (int k = 0; k < kNumArticulated; ++k) {
    const Sinusoid& s = joints[k];
    if (!finite3(s.base) || !finite3(s.amplitude) || !std::isfinite(s.frequency_hz) || !std::isfinite(s.phase) ||
        s.frequency_hz < 0.0) {
      throw SpecError("motion: joint " + std::to_string(k) + " has an invalid sinusoid");
    }
    const auto [lo, hi] = kFlexionRange[k % 3];
    const double amp = std::abs(s.amplitude.x());
    if (s.base.x() - amp < lo || s.base.x() + amp > hi) {
      throw SpecError("motion: joint " + std::to_string(k) + " flexion leaves its range");
    }
    for (int axis = 1; axis < 3; ++axis) {
      if (std::abs(s.base[axis]) + std::abs(s.amplitude[axis]) > kSideAxisRange) {
        throw SpecError("motion: joint " + std::to_string(k) + " side rotation too large");
      }
    }
  }
  if (!finite3(orient.base) || !finite3(orient.amplitude) || orient.frequency_hz < 0.0) {
    throw SpecError("motion: invalid orientation sinusoid");
  }
  if (!finite3(wrist.start) || !(wrist.speed >= 0.0) || !std::isfinite(wrist.speed)) {
    throw SpecError("motion: invalid wrist path");
  }
  if (wrist.kind == WristPath::Kind::line && wrist.speed > 0.0 && !(wrist.direction.norm() > 0.0)) {
    throw SpecError("motion: line path needs a direction");
  }
  if (wrist.kind == WristPath::Kind::arc && !(wrist.radius > 0.0)) {
    throw SpecError("motion: arc path needs a positive radius");
  }
  if (!shape.allFinite()) throw SpecError("motion: non-finite shape");
  if (rig.views < 1) throw SpecError("motion: rig needs at least one view");
  if (!(rig.radius > 0.0)) throw SpecError("motion: rig radius must be positive");
  try {
    rig.intrinsics.validate();
  } catch (const InvalidArgument& e) {
    throw SpecError(std::string("motion: ") + e.what());
  }
}

MotionSpec MotionSpec::demo() {
  MotionSpec spec;
  spec.num_frames = 60;
  spec.fps = 30.0;
  const std::array<double, 3> base = {0.25, 0.30, 0.20};
  for (int f = 0; f < kNumFingers; ++f) {
    for (int c = 0; c < 3; ++c) {
      Sinusoid& s = spec.joints[3 * f + c];
      s.base = Eigen::Vector3d(base[c], 0.0, 0.0);
      s.amplitude = Eigen::Vector3d(base[c], 0.0, f == 0 ? 0.1 : 0.0);
      s.frequency_hz = 0.5;
      s.phase = 0.6 * f;
    }
  }
  spec.orient.amplitude = Eigen::Vector3d(0.10, 0.15, 0.05);
  spec.orient.frequency_hz = 0.3;
  spec.wrist.kind = WristPath::Kind::line;
  spec.wrist.start = Eigen::Vector3d(-0.03, 0.0, 0.0);
  spec.wrist.direction = Eigen::Vector3d::UnitX();
  spec.wrist.speed = 0.1;
  return spec;
}

void NoiseSpec::validate() const {
  for (double s : {sigma_position, sigma_orient, sigma_pose, sigma_pixel}) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw SpecError("noise: sigmas must be finite and non-negative");
  }
  if (!(visibility_dropout >= 0.0 && visibility_dropout <= 1.0)) {
    throw SpecError("noise: visibility_dropout must lie in [0, 1]");
  }
}

GeneratedSequence generate_sequence(const MotionSpec& spec, Rng& rng) {
  spec.validate();
  std::array<double, kNumArticulated> phase{};
  for (int k = 0; k < kNumArticulated; ++k) phase[k] = spec.joints[k].phase;
  if (spec.randomize_phase) {
    std::uniform_real_distribution<double> uniform(0.0, 2.0 * kPi);
    for (double& p : phase) p = uniform(rng);
  }

  GeneratedSequence out;
  TrajectoryParams& gt = out.ground_truth;
  gt.shape = spec.shape;
  gt.frames.resize(spec.num_frames);
  for (int t = 0; t < spec.num_frames; ++t) {
    const double time = t / spec.fps;
    FramePose<double>& f = gt.frames[t];
    f.global_orient = evaluate(spec.orient, time);
    f.position = wrist_position(spec.wrist, time);
    for (int k = 0; k < kNumArticulated; ++k) {
      Sinusoid s = spec.joints[k];
      s.phase = phase[k];
      f.joint_rotations.row(k) = evaluate(s, time).transpose();
    }
  }

  Eigen::Vector3d target;
  if (spec.rig.target) {
    target = *spec.rig.target;
  } else {
    target = Eigen::Vector3d::Zero();
    for (const auto& f : gt.frames) target += f.position;
    target = target / spec.num_frames + Eigen::Vector3d(0.0, 0.08, 0.0);
  }

  const int views = spec.rig.views;
  const double elevation = spec.rig.elevation_deg * kDegToRad;
  for (int v = 0; v < views; ++v) {
    const double az_deg =
        views == 1 ? 0.0 : -0.5 * spec.rig.azimuth_span_deg + spec.rig.azimuth_span_deg * v / (views - 1);
    const double az = az_deg * kDegToRad;
    const Eigen::Vector3d eye =
        target + spec.rig.radius * Eigen::Vector3d(std::cos(elevation) * std::sin(az), std::sin(elevation),
                                                   std::cos(elevation) * std::cos(az));
    Camera cam;
    cam.intrinsics = spec.rig.intrinsics;
    cam.extrinsics = look_at(eye, target);
    out.rig.views.push_back(cam);
  }

  for (int v = 0; v < views; ++v) {
    const Camera& cam = out.rig.views[v];
    for (const auto& f : gt.frames) {
      const Eigen::Vector3d p_cam = to_camera<double>(f.position, cam.extrinsics);
      const Eigen::Vector2d uv = project_camera_point<double>(p_cam, cam.intrinsics);
      if (!(p_cam.z() > kMinDepth) || uv.x() < 0.0 || uv.y() < 0.0 || uv.x() >= cam.intrinsics.width ||
          uv.y() >= cam.intrinsics.height) {
        throw SpecError("motion: camera " + std::to_string(v) + " does not see the whole wrist path");
      }
    }
  }
  return out;
}

TrajectoryParams corrupt_trajectory(const TrajectoryParams& gt, const NoiseSpec& noise, Rng& rng) {
  noise.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  TrajectoryParams out = gt;
  for (FramePose<double>& f : out.frames) {
    for (int i = 0; i < 3; ++i) f.global_orient[i] += noise.sigma_orient * normal(rng);
    for (int i = 0; i < 3; ++i) f.position[i] += noise.sigma_position * normal(rng);
    for (int k = 0; k < kNumArticulated; ++k) {
      for (int i = 0; i < 3; ++i) f.joint_rotations(k, i) += noise.sigma_pose * normal(rng);
    }
  }
  return out;
}

SequenceObservation render_observations(const TrajectoryParams& gt, const CameraRig& rig,
                                        const HandSkeleton& skeleton, const NoiseSpec& noise, Rng& rng) {
  noise.validate();
  rig.validate();
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SequenceObservation obs(gt.num_frames(), rig);
  for (int t = 0; t < gt.num_frames(); ++t) {
    const Joints<double> joints = forward_kinematics<double>(skeleton, gt.shape, gt.frames[t]);
    for (int v = 0; v < rig.num_views(); ++v) {
      const Camera& cam = rig.views[v];
      auto& landmarks = obs.landmarks_at(t, v);
      auto& visible = obs.visible_at(t, v);
      for (int j = 0; j < kNumJoints; ++j) {
        const double nu = normal(rng);
        const double nv = normal(rng);
        const bool dropped = unit(rng) < noise.visibility_dropout;
        const Eigen::Vector3d p_cam = to_camera<double>(joints.row(j).transpose(), cam.extrinsics);
        if (!(p_cam.z() > kMinDepth)) {
          visible[j] = false;
          landmarks.row(j).setZero();
          continue;
        }
        const Eigen::Vector2d uv = project_camera_point<double>(p_cam, cam.intrinsics);
        landmarks(j, 0) = uv.x() + noise.sigma_pixel * nu;
        landmarks(j, 1) = uv.y() + noise.sigma_pixel * nv;
        visible[j] = !dropped;
      }
    }
  }
  if (obs.visible_count() == 0) throw SpecError("render: no landmark is visible in any view");
  return obs;
}

HandSkeleton mirror_skeleton(const HandSkeleton& skeleton) {
  HandSkeleton out = skeleton;
  out.rest_offset.col(0) = -skeleton.rest_offset.col(0);
  return out;
}

Joints<double> reflect_joints(const Joints<double>& joints) {
  Joints<double> out = joints;
  out.col(0) = -joints.col(0);
  return out;
}

std::pair<TrajectoryParams, SequenceObservation> mirror_hand(const TrajectoryParams& traj,
                                                             const SequenceObservation& obs) {
  const auto mirror_aa = [](auto&& aa) {
    aa.y() = -aa.y();
    aa.z() = -aa.z();
  };
  TrajectoryParams t = traj;
  for (FramePose<double>& f : t.frames) {
    f.position.x() = -f.position.x();
    mirror_aa(f.global_orient);
    f.joint_rotations.col(1) = -f.joint_rotations.col(1);
    f.joint_rotations.col(2) = -f.joint_rotations.col(2);
  }

  SequenceObservation o = obs;
  const Eigen::Matrix3d s = reflection();
  for (Camera& cam : o.rig.views) {
    cam.extrinsics.rotation = s * cam.extrinsics.rotation * s;
    cam.extrinsics.translation = s * cam.extrinsics.translation;
  }
  for (int frame = 0; frame < o.num_frames; ++frame) {
    for (int v = 0; v < o.num_views(); ++v) {
      auto& l = o.landmarks_at(frame, v);
      const double cx = o.rig.views[v].intrinsics.cx;
      l.col(0) = (2.0 * cx - l.col(0).array()).matrix();
    }
  }
  return {std::move(t), std::move(o)};
}

RandomProblem random_problem(int num_frames, int num_views, std::uint64_t seed) {
  if (num_frames < 3) throw InvalidArgument("random_problem: need at least 3 frames");
  if (num_views < 1) throw InvalidArgument("random_problem: need at least one view");
  Rng rng(seed);
  auto uniform = [&rng](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  constexpr double kShapeRange = 1.0;
  constexpr double kOrientRange = 0.8;
  constexpr double kPositionRange = 0.05;
  constexpr double kJointRange = 0.6;

  RandomProblem p;
  for (int k = 0; k < kNumShape; ++k) p.params.shape[k] = uniform(-kShapeRange, kShapeRange);
  p.params.frames.resize(num_frames);
  for (FramePose<double>& f : p.params.frames) {
    for (int i = 0; i < 3; ++i) f.global_orient[i] = uniform(-kOrientRange, kOrientRange);
    for (int i = 0; i < 3; ++i) f.position[i] = uniform(-kPositionRange, kPositionRange);
    for (int k = 0; k < kNumArticulated; ++k) {
      for (int i = 0; i < 3; ++i) f.joint_rotations(k, i) = uniform(-kJointRange, kJointRange);
    }
  }
  p.scale = Eigen::VectorXd::Constant(flat_size(num_frames), kShapeRange);
  for (int t = 0; t < num_frames; ++t) {
    p.scale.segment<3>(frame_offset(t) + kOrientOffset).setConstant(kOrientRange);
    p.scale.segment<3>(frame_offset(t) + kPositionOffset).setConstant(kPositionRange);
    p.scale.segment<3 * kNumArticulated>(frame_offset(t) + kJointRotationOffset).setConstant(kJointRange);
  }

  CameraRig rig;
  const Eigen::Vector3d target(0.0, 0.08, 0.0);
  for (int v = 0; v < num_views; ++v) {
    const double az = uniform(-60.0, 60.0) * kDegToRad;
    const double el = uniform(-20.0, 30.0) * kDegToRad;
    const double radius = uniform(0.4, 0.7);
    const Eigen::Vector3d eye =
        target + radius * Eigen::Vector3d(std::cos(el) * std::sin(az), std::sin(el), std::cos(el) * std::cos(az));
    Camera cam;
    cam.intrinsics.fx = uniform(400.0, 600.0);
    cam.intrinsics.fy = cam.intrinsics.fx;
    cam.extrinsics = look_at(eye, target);
    rig.views.push_back(cam);
  }

  const HandSkeleton skeleton = HandSkeleton::right_hand();
  p.obs = SequenceObservation(num_frames, rig);
  for (int t = 0; t < num_frames; ++t) {
    const Joints<double> joints = forward_kinematics<double>(skeleton, p.params.shape, p.params.frames[t]);
    for (int v = 0; v < num_views; ++v) {
      const Camera& cam = rig.views[v];
      for (int j = 0; j < kNumJoints; ++j) {
        const double du = uniform(-15.0, 15.0);
        const double dv = uniform(-15.0, 15.0);
        const Eigen::Vector3d p_cam = to_camera<double>(joints.row(j).transpose(), cam.extrinsics);
        if (!(p_cam.z() > kMinDepth)) continue;
        const Eigen::Vector2d uv = project_camera_point<double>(p_cam, cam.intrinsics);
        p.obs.landmarks_at(t, v).row(j) = Eigen::RowVector2d(uv.x() + du, uv.y() + dv);
        p.obs.visible_at(t, v)[j] = true;
      }
    }
  }
  return p;
}

}  // namespace handsmooth
