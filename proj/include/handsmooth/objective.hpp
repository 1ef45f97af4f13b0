#pragma once

// The sequence-refinement objective:
//
//   L = w_pose * A(pose) + w_orient * A(orient) + w_position * A(position)
//       + w_2d * L_2d
//
// where A(series) = 1/(N-2) * sum_{t>=3} mean_d |x_t - 2 x_{t-1} + x_{t-2}|
// (smoothed absolute value) and L_2d is the mean pixel distance between the
// projected joints and the observed 2D landmarks over every visible,
// projectable (frame, view, joint).

#include <array>
#include <vector>

#include <Eigen/Core>

#include "handsmooth/autodiff.hpp"
#include "handsmooth/camera.hpp"
#include "handsmooth/hand_model.hpp"

namespace handsmooth {

// Flattened layout: [shape(10), then per frame: orient(3), position(3),
// joint_rotations(45)].
inline constexpr int kParamsPerFrame = 3 + 3 + 3 * kNumArticulated;
inline constexpr int kOrientOffset = 0;
inline constexpr int kPositionOffset = 3;
inline constexpr int kJointRotationOffset = 6;

inline constexpr Eigen::Index frame_offset(int frame) {
  return kNumShape + static_cast<Eigen::Index>(frame) * kParamsPerFrame;
}
inline constexpr Eigen::Index flat_size(int num_frames) { return frame_offset(num_frames); }

struct TrajectoryParams {
  ShapeParams shape = ShapeParams::Zero();
  std::vector<FramePose<double>> frames;

  int num_frames() const { return static_cast<int>(frames.size()); }

  Eigen::VectorXd flatten() const;
  static TrajectoryParams unflatten(const Eigen::VectorXd& flat);

  // N >= 3 and every value finite.
  void validate() const;

  bool operator==(const TrajectoryParams&) const = default;
};

template <typename Scalar>
ShapeVector<Scalar> shape_from_flat(const ad::VectorX<Scalar>& flat) {
  return flat.template head<kNumShape>();
}

template <typename Scalar>
FramePose<Scalar> frame_from_flat(const ad::VectorX<Scalar>& flat, int frame) {
  const Eigen::Index o = frame_offset(frame);
  FramePose<Scalar> pose;
  pose.global_orient = flat.template segment<3>(o + kOrientOffset);
  pose.position = flat.template segment<3>(o + kPositionOffset);
  for (int k = 0; k < kNumArticulated; ++k) {
    pose.joint_rotations.row(k) = flat.template segment<3>(o + kJointRotationOffset + 3 * k).transpose();
  }
  return pose;
}

// N x D matrix of the `width` parameters starting at `offset` in each frame.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> frame_series(const ad::VectorX<Scalar>& flat,
                                                                    int num_frames, int offset,
                                                                    int width) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> series(num_frames, width);
  for (int t = 0; t < num_frames; ++t) {
    series.row(t) = flat.segment(frame_offset(t) + offset, width).transpose();
  }
  return series;
}

// Per-frame, per-view 2D targets. Frame-view blocks are stored frame-major.
struct SequenceObservation {
  using Landmarks = Eigen::Matrix<double, kNumJoints, 2, Eigen::RowMajor>;
  using Visibility = std::array<bool, kNumJoints>;

  int num_frames = 0;
  CameraRig rig;
  std::vector<Landmarks> landmarks;
  std::vector<Visibility> visible;

  SequenceObservation() = default;
  SequenceObservation(int frames, CameraRig camera_rig);

  int num_views() const { return rig.num_views(); }
  Landmarks& landmarks_at(int frame, int view) { return landmarks[index(frame, view)]; }
  const Landmarks& landmarks_at(int frame, int view) const { return landmarks[index(frame, view)]; }
  Visibility& visible_at(int frame, int view) { return visible[index(frame, view)]; }
  const Visibility& visible_at(int frame, int view) const { return visible[index(frame, view)]; }

  int visible_count() const;

  // Dimensions consistent, values finite, rig valid, >= 1 visible landmark.
  void validate() const;

  // Copy restricted to the listed views, in the given order.
  SequenceObservation select_views(const std::vector<int>& views) const;

  bool operator==(const SequenceObservation&) const = default;

 private:
  std::size_t index(int frame, int view) const {
    return static_cast<std::size_t>(frame) * static_cast<std::size_t>(num_views()) +
           static_cast<std::size_t>(view);
  }
};

struct LossWeights {
  double pose = 0.5;
  double orients = 0.5;
  double position = 0.5;
  double reprojection = 1.0;

  void validate() const;
  bool operator==(const LossWeights&) const = default;
};

// Per-landmark pixel penalty in the 2D term. `l2` (default) is the Euclidean
// distance, smoothed by kAbsSmoothing at zero residual.
enum class ReprojectionNorm { l2, l2_squared, l1 };

template <typename Scalar>
struct LossTerms {
  Scalar acce_pose{0.0};
  Scalar acce_orients{0.0};
  Scalar acce_position{0.0};
  Scalar reprojection{0.0};
  Scalar total{0.0};
};

// Requires N >= 3.
template <typename Scalar>
Scalar acceleration_loss(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& series) {
  const Eigen::Index n = series.rows();
  const Eigen::Index d = series.cols();
  if (n < 3) throw InvalidArgument("acceleration_loss: need at least 3 frames");
  if (d < 1) throw InvalidArgument("acceleration_loss: series has no columns");
  Scalar sum(0.0);
  for (Eigen::Index t = 2; t < n; ++t) {
    Scalar frame_sum(0.0);
    for (Eigen::Index k = 0; k < d; ++k) {
      frame_sum += ad::smooth_abs<Scalar>(series(t, k) - 2.0 * series(t - 1, k) + series(t - 2, k));
    }
    sum += frame_sum / static_cast<double>(d);
  }
  return sum / static_cast<double>(n - 2);
}

template <typename Scalar>
Scalar landmark_penalty(const Vector2<Scalar>& residual, ReprojectionNorm norm) {
  switch (norm) {
    case ReprojectionNorm::l2_squared:
      return residual.squaredNorm();
    case ReprojectionNorm::l1:
      return ad::smooth_abs<Scalar>(residual.x()) + ad::smooth_abs<Scalar>(residual.y());
    case ReprojectionNorm::l2:
    default:
      return ad::smooth_sqrt<Scalar>(residual.squaredNorm());
  }
}

template <typename Scalar>
Scalar reprojection_loss(const ad::VectorX<Scalar>& flat, const SequenceObservation& obs,
                         const HandSkeleton& skeleton, ReprojectionNorm norm = ReprojectionNorm::l2) {
  const int n = obs.num_frames;
  if (flat.size() != flat_size(n)) throw InvalidArgument("reprojection_loss: parameter/observation frame mismatch");
  const ShapeVector<Scalar> beta = shape_from_flat<Scalar>(flat);

  Scalar sum(0.0);
  long count = 0;
  for (int t = 0; t < n; ++t) {
    const Joints<Scalar> joints = forward_kinematics<Scalar>(skeleton, beta, frame_from_flat<Scalar>(flat, t));
    for (int v = 0; v < obs.num_views(); ++v) {
      const Camera& cam = obs.rig.views[v];
      const auto& target = obs.landmarks_at(t, v);
      const auto& vis = obs.visible_at(t, v);
      for (int j = 0; j < kNumJoints; ++j) {
        if (!vis[j]) continue;
        const Vector3<Scalar> p_cam = to_camera<Scalar>(joints.row(j).transpose(), cam.extrinsics);
        if (!(ad::value(p_cam.z()) > kMinDepth)) continue;
        const Vector2<Scalar> uv = project_camera_point<Scalar>(p_cam, cam.intrinsics);
        const Vector2<Scalar> residual(uv.x() - target(j, 0), uv.y() - target(j, 1));
        sum += landmark_penalty<Scalar>(residual, norm);
        ++count;
      }
    }
  }
  if (count == 0) throw DegenerateObservation("reprojection_loss: no visible landmark in front of any camera");
  return sum / static_cast<double>(count);
}

// Bundles the fixed inputs of the objective; callable on `double` and
// `ad::Var` parameter vectors.
class Objective {
 public:
  Objective(const HandSkeleton& skeleton, const SequenceObservation& obs, LossWeights weights = {},
            ReprojectionNorm norm = ReprojectionNorm::l2);

  template <typename Scalar>
  LossTerms<Scalar> terms(const ad::VectorX<Scalar>& flat) const {
    const int n = obs_->num_frames;
    if (flat.size() != flat_size(n)) throw InvalidArgument("objective: parameter length mismatch");
    LossTerms<Scalar> out;
    out.acce_pose = acceleration_loss<Scalar>(frame_series<Scalar>(flat, n, kJointRotationOffset, 3 * kNumArticulated));
    out.acce_orients = acceleration_loss<Scalar>(frame_series<Scalar>(flat, n, kOrientOffset, 3));
    out.acce_position = acceleration_loss<Scalar>(frame_series<Scalar>(flat, n, kPositionOffset, 3));
    out.reprojection = reprojection_loss<Scalar>(flat, *obs_, *skeleton_, norm_);
    out.total = weights_.pose * out.acce_pose + weights_.orients * out.acce_orients +
                weights_.position * out.acce_position + weights_.reprojection * out.reprojection;
    return out;
  }

  template <typename Scalar>
  Scalar operator()(const ad::VectorX<Scalar>& flat) const {
    return terms<Scalar>(flat).total;
  }

  const LossWeights& weights() const { return weights_; }
  Eigen::Index num_params() const { return flat_size(obs_->num_frames); }

 private:
  const HandSkeleton* skeleton_;
  const SequenceObservation* obs_;
  LossWeights weights_;
  ReprojectionNorm norm_;
};

// Convenience wrappers on concrete values.
double acceleration_loss(const Eigen::MatrixXd& series);
double reprojection_loss(const TrajectoryParams& traj, const SequenceObservation& obs,
                         const HandSkeleton& skeleton, ReprojectionNorm norm = ReprojectionNorm::l2);
LossTerms<double> loss_terms(const TrajectoryParams& traj, const SequenceObservation& obs,
                             const HandSkeleton& skeleton, const LossWeights& weights = {},
                             ReprojectionNorm norm = ReprojectionNorm::l2);
double total_loss(const TrajectoryParams& traj, const SequenceObservation& obs, const HandSkeleton& skeleton,
                  const LossWeights& weights = {}, ReprojectionNorm norm = ReprojectionNorm::l2);

}  // namespace handsmooth
