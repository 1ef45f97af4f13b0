#pragma once

// Synthetic ground truth and simulated per-frame predictions.
//
// Ground truth is a family of sinusoidal joint / orientation motions plus a
// line or arc wrist path, sampled at a fixed frame rate. Predictions are
// produced by adding iid Gaussian noise to parameters and to projected 2D
// landmarks.

#include <array>
#include <optional>
#include <utility>

#include <Eigen/Core>

#include "handsmooth/camera.hpp"
#include "handsmooth/hand_model.hpp"
#include "handsmooth/objective.hpp"

namespace handsmooth {

// value(t) = base + amplitude * sin(2 pi frequency t / fps + phase), per axis.
struct Sinusoid {
  Eigen::Vector3d base = Eigen::Vector3d::Zero();
  Eigen::Vector3d amplitude = Eigen::Vector3d::Zero();
  double frequency_hz = 0.0;
  double phase = 0.0;

  bool operator==(const Sinusoid&) const = default;
};

struct WristPath {
  enum class Kind { line, arc };
  Kind kind = Kind::line;
  Eigen::Vector3d start = Eigen::Vector3d::Zero();     // line: first position; arc: centre
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();  // line only, normalized on use
  double radius = 0.0;                                  // arc only, in the xy plane
  double speed = 0.0;                                   // m/s along the path

  bool operator==(const WristPath&) const = default;
};

// Cameras on a ring of `radius` around `target` on the +z (palm) side,
// spread evenly over `azimuth_span_deg`, raised by `elevation_deg`.
struct RigSpec {
  int views = 2;
  double radius = 0.5;
  double elevation_deg = 15.0;
  double azimuth_span_deg = 60.0;
  Intrinsics intrinsics;
  std::optional<Eigen::Vector3d> target;  // default: wrist path midpoint + 8 cm along +y

  bool operator==(const RigSpec&) const = default;
};

struct MotionSpec {
  int num_frames = 60;
  double fps = 30.0;
  std::array<Sinusoid, kNumArticulated> joints{};
  Sinusoid orient;
  WristPath wrist;
  ShapeParams shape = ShapeParams::Zero();
  RigSpec rig;
  bool randomize_phase = false;  // draw joint phases from the generator

  // Frame count, rate, joint ranges, rig parameters. Throws SpecError.
  void validate() const;

  // 60 frames at 30 fps, gentle flexion waves and a 10 cm/s sideways sweep
  // seen by two cameras.
  static MotionSpec demo();

  bool operator==(const MotionSpec&) const = default;
};

struct NoiseSpec {
  double sigma_position = 0.0;  // m
  double sigma_orient = 0.0;    // rad
  double sigma_pose = 0.0;      // rad
  double sigma_pixel = 0.0;     // px
  double visibility_dropout = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const NoiseSpec&) const = default;
};

// Flexion limits (local x axis, radians) for proximal / middle / distal
// joints, and the bound on the two remaining axes.
inline constexpr std::array<std::pair<double, double>, 3> kFlexionRange = {
    {{-0.6, 1.7}, {-0.2, 2.0}, {-0.2, 1.5}}};
inline constexpr double kSideAxisRange = 0.6;

struct GeneratedSequence {
  TrajectoryParams ground_truth;
  CameraRig rig;
};

// Deterministic given `rng` state; the generator is only consumed when
// `randomize_phase` is set. Throws SpecError if a camera does not see the
// whole wrist path.
GeneratedSequence generate_sequence(const MotionSpec& spec, Rng& rng);

// Gaussian noise on orient / position / joint rotations, shape untouched.
TrajectoryParams corrupt_trajectory(const TrajectoryParams& gt, const NoiseSpec& noise, Rng& rng);

// Projects FK(gt) into every view with Gaussian pixel noise; landmarks
// behind a camera or dropped out are marked invisible. Throws SpecError if
// nothing is visible.
SequenceObservation render_observations(const TrajectoryParams& gt, const CameraRig& rig,
                                        const HandSkeleton& skeleton, const NoiseSpec& noise, Rng& rng);

// Reflection of the world across the x = 0 plane.
inline Eigen::Matrix3d reflection() { return Eigen::Vector3d(-1.0, 1.0, 1.0).asDiagonal(); }

// Left-hand counterpart of `skeleton`: rest offsets reflected.
HandSkeleton mirror_skeleton(const HandSkeleton& skeleton);

Joints<double> reflect_joints(const Joints<double>& joints);

// Flips handedness of a sequence: positions (-x, y, z), axis-angles
// (ax, -ay, -az), extrinsics conjugated by the reflection, landmarks
// u -> 2 cx - u. An involution.
std::pair<TrajectoryParams, SequenceObservation> mirror_hand(const TrajectoryParams& traj,
                                                             const SequenceObservation& obs);

// Random well-conditioned problem for gradient checks: random rig around
// the hand, random poses / shape, targets scattered around the projections.
struct RandomProblem {
  TrajectoryParams params;
  SequenceObservation obs;
  // Sampling half-width of each flattened parameter.
  Eigen::VectorXd scale;
};
RandomProblem random_problem(int num_frames, int num_views, std::uint64_t seed);

}  // namespace handsmooth
