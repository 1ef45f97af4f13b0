#pragma once

// Small synthetic sequences shared by the unit tests and the acceptance
// binary.

#include "handsmooth/synth.hpp"

namespace scenario {

struct Exact {
  handsmooth::TrajectoryParams gt;
  handsmooth::SequenceObservation obs;
};

// Rendered with zero pixel noise and no dropout.
inline Exact exact(const handsmooth::MotionSpec& spec, std::uint64_t seed = 0) {
  handsmooth::Rng rng(seed);
  const auto seq = handsmooth::generate_sequence(spec, rng);
  return {seq.ground_truth,
          handsmooth::render_observations(seq.ground_truth, seq.rig, handsmooth::HandSkeleton::right_hand(), {},
                                          rng)};
}

// Fixed articulation and orientation, wrist moving at constant velocity.
// 32 fps and 0.125 m/s keep every sampled position a dyadic rational, so
// the second differences are exactly zero.
inline handsmooth::MotionSpec constant_velocity(int frames) {
  handsmooth::MotionSpec spec = handsmooth::MotionSpec::demo();
  spec.num_frames = frames;
  spec.fps = 32.0;
  for (auto& j : spec.joints) {
    j.amplitude.setZero();
    j.frequency_hz = 0.0;
    j.phase = 0.0;
  }
  spec.orient.base = Eigen::Vector3d(0.1, -0.2, 0.05);
  spec.orient.amplitude.setZero();
  spec.orient.frequency_hz = 0.0;
  spec.wrist.start = Eigen::Vector3d(-0.0625, 0.0, 0.0);
  spec.wrist.direction = Eigen::Vector3d::UnitX();
  spec.wrist.speed = 0.125;
  return spec;
}

inline handsmooth::MotionSpec static_hand(int frames) {
  handsmooth::MotionSpec spec = constant_velocity(frames);
  spec.wrist.speed = 0.0;
  return spec;
}

}  // namespace scenario
