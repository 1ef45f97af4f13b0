#pragma once

#include <optional>
#include <vector>

#include "handsmooth/hand_model.hpp"
#include "handsmooth/objective.hpp"

namespace handsmooth {

// N frames of 21 world joints, meters.
using JointTrajectory = std::vector<Joints<double>>;

struct MetricReport {
  std::optional<double> mpjpe_mm;   // absent without ground truth
  double accel_error_mm = 0.0;      // mm / frame^2
  double reproj_px = 0.0;
  std::vector<double> per_frame_mpjpe_mm;   // N entries, empty without ground truth
  std::vector<double> per_frame_accel_mm;   // N - 2 entries, frames 3..N

  bool operator==(const MetricReport&) const = default;
};

JointTrajectory joint_trajectory(const TrajectoryParams& traj, const HandSkeleton& skeleton);

// Mean joint distance in mm, no alignment.
double mpjpe(const JointTrajectory& pred, const JointTrajectory& gt);
std::vector<double> per_frame_mpjpe(const JointTrajectory& pred, const JointTrajectory& gt);

// Mean over frames 3..N and joints of |x_t - 2 x_{t-1} + x_{t-2}|, mm.
double acceleration_error(const JointTrajectory& joints);
std::vector<double> per_frame_acceleration_error(const JointTrajectory& joints);

MetricReport evaluate(const TrajectoryParams& refined, const std::optional<TrajectoryParams>& gt,
                      const SequenceObservation& obs, const HandSkeleton& skeleton);

}  // namespace handsmooth
