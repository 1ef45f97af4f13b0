#include "handsmooth/objective.hpp"

namespace handsmooth {

Eigen::VectorXd TrajectoryParams::flatten() const {
  Eigen::VectorXd flat(flat_size(num_frames()));
  flat.head<kNumShape>() = shape;
  for (int t = 0; t < num_frames(); ++t) {
    const Eigen::Index o = frame_offset(t);
    const FramePose<double>& f = frames[t];
    flat.segment<3>(o + kOrientOffset) = f.global_orient;
    flat.segment<3>(o + kPositionOffset) = f.position;
    for (int k = 0; k < kNumArticulated; ++k) {
      flat.segment<3>(o + kJointRotationOffset + 3 * k) = f.joint_rotations.row(k).transpose();
    }
  }
  return flat;
}

TrajectoryParams TrajectoryParams::unflatten(const Eigen::VectorXd& flat) {
  const Eigen::Index body = flat.size() - kNumShape;
  if (body < 0 || body % kParamsPerFrame != 0) {
    throw InvalidArgument("unflatten: length " + std::to_string(flat.size()) + " is not 10 + 51*N");
  }
  TrajectoryParams traj;
  traj.shape = flat.head<kNumShape>();
  const int n = static_cast<int>(body / kParamsPerFrame);
  traj.frames.reserve(n);
  for (int t = 0; t < n; ++t) traj.frames.push_back(frame_from_flat<double>(flat, t));
  return traj;
}

void TrajectoryParams::validate() const {
  if (num_frames() < 3) throw InvalidArgument("trajectory: need at least 3 frames");
  if (!flatten().allFinite()) throw InvalidArgument("trajectory: non-finite parameter");
}

SequenceObservation::SequenceObservation(int frames, CameraRig camera_rig)
    : num_frames(frames), rig(std::move(camera_rig)) {
  const std::size_t blocks = static_cast<std::size_t>(frames) * static_cast<std::size_t>(num_views());
  landmarks.assign(blocks, Landmarks::Zero());
  Visibility none{};
  visible.assign(blocks, none);
}

int SequenceObservation::visible_count() const {
  int count = 0;
  for (const Visibility& v : visible) {
    for (bool b : v) count += b ? 1 : 0;
  }
  return count;
}

void SequenceObservation::validate() const {
  rig.validate();
  if (num_frames < 1) throw InvalidArgument("observation: no frames");
  const std::size_t blocks = static_cast<std::size_t>(num_frames) * static_cast<std::size_t>(num_views());
  if (landmarks.size() != blocks || visible.size() != blocks) {
    throw InvalidArgument("observation: landmark blocks do not match frames x views");
  }
  for (const Landmarks& l : landmarks) {
    if (!l.allFinite()) throw InvalidArgument("observation: non-finite landmark");
  }
  if (visible_count() == 0) throw DegenerateObservation("observation: no visible landmark");
}

SequenceObservation SequenceObservation::select_views(const std::vector<int>& views) const {
  CameraRig sub;
  for (int v : views) {
    if (v < 0 || v >= num_views()) throw InvalidArgument("select_views: view index out of range");
    sub.views.push_back(rig.views[v]);
  }
  SequenceObservation out(num_frames, std::move(sub));
  for (int t = 0; t < num_frames; ++t) {
    for (std::size_t i = 0; i < views.size(); ++i) {
      out.landmarks_at(t, static_cast<int>(i)) = landmarks_at(t, views[i]);
      out.visible_at(t, static_cast<int>(i)) = visible_at(t, views[i]);
    }
  }
  return out;
}

void LossWeights::validate() const {
  for (double w : {pose, orients, position, reprojection}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidArgument("loss weights must be finite and non-negative");
  }
}

Objective::Objective(const HandSkeleton& skeleton, const SequenceObservation& obs, LossWeights weights,
                     ReprojectionNorm norm)
    : skeleton_(&skeleton), obs_(&obs), weights_(weights), norm_(norm) {
  weights_.validate();
  if (obs.num_frames < 3) throw InvalidArgument("objective: need at least 3 frames");
}

double acceleration_loss(const Eigen::MatrixXd& series) { return acceleration_loss<double>(series); }

double reprojection_loss(const TrajectoryParams& traj, const SequenceObservation& obs,
                         const HandSkeleton& skeleton, ReprojectionNorm norm) {
  if (traj.num_frames() != obs.num_frames) {
    throw InvalidArgument("reprojection_loss: trajectory and observation frame counts differ");
  }
  return reprojection_loss<double>(traj.flatten(), obs, skeleton, norm);
}

LossTerms<double> loss_terms(const TrajectoryParams& traj, const SequenceObservation& obs,
                             const HandSkeleton& skeleton, const LossWeights& weights, ReprojectionNorm norm) {
  if (traj.num_frames() != obs.num_frames) {
    throw InvalidArgument("loss_terms: trajectory and observation frame counts differ");
  }
  return Objective(skeleton, obs, weights, norm).terms<double>(traj.flatten());
}

double total_loss(const TrajectoryParams& traj, const SequenceObservation& obs, const HandSkeleton& skeleton,
                  const LossWeights& weights, ReprojectionNorm norm) {
  return loss_terms(traj, obs, skeleton, weights, norm).total;
}

}  // namespace handsmooth
