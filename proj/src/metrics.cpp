#include "handsmooth/metrics.hpp"

#include <numeric>

namespace handsmooth {

namespace {

void check_same_shape(const JointTrajectory& a, const JointTrajectory& b) {
  if (a.size() != b.size()) throw InvalidArgument("metrics: frame counts differ");
  if (a.empty()) throw InvalidArgument("metrics: empty trajectory");
}

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

}  // namespace

JointTrajectory joint_trajectory(const TrajectoryParams& traj, const HandSkeleton& skeleton) {
  JointTrajectory out;
  out.reserve(traj.frames.size());
  for (const FramePose<double>& f : traj.frames) out.push_back(forward_kinematics<double>(skeleton, traj.shape, f));
  return out;
}

std::vector<double> per_frame_mpjpe(const JointTrajectory& pred, const JointTrajectory& gt) {
  check_same_shape(pred, gt);
  std::vector<double> out(pred.size());
  for (std::size_t t = 0; t < pred.size(); ++t) {
    out[t] = 1000.0 * (pred[t] - gt[t]).rowwise().norm().mean();
  }
  return out;
}

double mpjpe(const JointTrajectory& pred, const JointTrajectory& gt) { return mean(per_frame_mpjpe(pred, gt)); }

std::vector<double> per_frame_acceleration_error(const JointTrajectory& joints) {
  if (joints.size() < 3) throw InvalidArgument("acceleration_error: need at least 3 frames");
  std::vector<double> out(joints.size() - 2);
  for (std::size_t t = 2; t < joints.size(); ++t) {
    out[t - 2] = 1000.0 * (joints[t] - 2.0 * joints[t - 1] + joints[t - 2]).rowwise().norm().mean();
  }
  return out;
}

double acceleration_error(const JointTrajectory& joints) { return mean(per_frame_acceleration_error(joints)); }

MetricReport evaluate(const TrajectoryParams& refined, const std::optional<TrajectoryParams>& gt,
                      const SequenceObservation& obs, const HandSkeleton& skeleton) {
  MetricReport report;
  const JointTrajectory pred = joint_trajectory(refined, skeleton);
  if (gt) {
    report.per_frame_mpjpe_mm = per_frame_mpjpe(pred, joint_trajectory(*gt, skeleton));
    report.mpjpe_mm = mean(report.per_frame_mpjpe_mm);
  }
  report.per_frame_accel_mm = per_frame_acceleration_error(pred);
  report.accel_error_mm = mean(report.per_frame_accel_mm);
  report.reproj_px = reprojection_loss(refined, obs, skeleton);
  return report;
}

}  // namespace handsmooth
