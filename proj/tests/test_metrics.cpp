#include "doctest.h"

#include <numbers>
#include <random>

#include "handsmooth/io.hpp"
#include "handsmooth/metrics.hpp"
#include "handsmooth/synth.hpp"
#include "scenarios.hpp"

using namespace handsmooth;

namespace {

JointTrajectory random_joints(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  JointTrajectory out(n);
  for (auto& f : out) {
    for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = u(rng);
  }
  return out;
}

double brute_mpjpe(const JointTrajectory& a, const JointTrajectory& b) {
  double sum = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (int j = 0; j < kNumJoints; ++j) {
      const double dx = a[t](j, 0) - b[t](j, 0);
      const double dy = a[t](j, 1) - b[t](j, 1);
      const double dz = a[t](j, 2) - b[t](j, 2);
      sum += std::sqrt(dx * dx + dy * dy + dz * dz);
    }
  }
  return 1000.0 * sum / static_cast<double>(a.size() * kNumJoints);
}

JointTrajectory offset(JointTrajectory j, const Eigen::RowVector3d& d) {
  for (auto& f : j) f.rowwise() += d;
  return j;
}

}  // namespace

TEST_CASE("mpjpe examples") {
  std::mt19937_64 rng(1);
  const JointTrajectory gt = random_joints(rng, 10);
  CHECK(mpjpe(gt, gt) == 0.0);
  CHECK(mpjpe(offset(gt, {0.001, 0.0, 0.0}), gt) == doctest::Approx(1.0).epsilon(1e-9));
  for (int trial = 0; trial < 20; ++trial) {
    const JointTrajectory a = random_joints(rng, 3 + trial);
    const JointTrajectory b = random_joints(rng, 3 + trial);
    CHECK(std::abs(mpjpe(a, b) - brute_mpjpe(a, b)) <= 1e-10);
  }
  CHECK_THROWS_AS(mpjpe(random_joints(rng, 3), random_joints(rng, 4)), InvalidArgument);
}

TEST_CASE("mpjpe is a metric") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const JointTrajectory a = random_joints(rng, 5);
    const JointTrajectory b = random_joints(rng, 5);
    const JointTrajectory c = random_joints(rng, 5);
    CHECK(mpjpe(a, b) == mpjpe(b, a));
    CHECK(mpjpe(a, c) <= mpjpe(a, b) + mpjpe(b, c) + 1e-12);
  }
}

TEST_CASE("acceleration_error examples") {
  JointTrajectory j(3, Joints<double>::Zero());
  CHECK(acceleration_error(j) == 0.0);
  // A single moving joint among 21 contributes 1/21 of its norm, so
  // put the same step on every joint.
  j[2].col(0).setConstant(0.001);
  CHECK(acceleration_error(j) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(per_frame_acceleration_error(j).size() == 1);

  std::mt19937_64 rng(3);
  const Joints<double> base = random_joints(rng, 1)[0];
  JointTrajectory velocity(12);
  for (int t = 0; t < 12; ++t) velocity[t] = base.rowwise() + Eigen::RowVector3d(0.25, -0.5, 0.125) * (t / 64.0);
  CHECK(acceleration_error(velocity) <= 1e-12);
  CHECK_THROWS_AS(acceleration_error(JointTrajectory(2, Joints<double>::Zero())), InvalidArgument);
}

TEST_CASE("acceleration_error ignores offsets and constant drift") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const JointTrajectory j = random_joints(rng, 8);
    const double base = acceleration_error(j);
    CHECK(acceleration_error(offset(j, {0.3, -0.1, 0.7})) == doctest::Approx(base).epsilon(1e-10));
    JointTrajectory drift = j;
    for (std::size_t t = 0; t < drift.size(); ++t) drift[t].rowwise() += Eigen::RowVector3d(0.01, 0.02, -0.03) * t;
    CHECK(acceleration_error(drift) == doctest::Approx(base).epsilon(1e-10));
  }
}

TEST_CASE("evaluate") {
  const HandSkeleton sk = HandSkeleton::right_hand();
  const scenario::Exact ex = scenario::exact(scenario::constant_velocity(20));
  SUBCASE("ground truth against itself") {
    const MetricReport r = evaluate(ex.gt, ex.gt, ex.obs, sk);
    REQUIRE(r.mpjpe_mm.has_value());
    CHECK(*r.mpjpe_mm == 0.0);
    CHECK(r.accel_error_mm <= 1e-9);
    CHECK(r.reproj_px <= 1e-9);
    CHECK(r.per_frame_mpjpe_mm.size() == 20);
    CHECK(r.per_frame_accel_mm.size() == 18);
  }
  SUBCASE("without ground truth") {
    const MetricReport r = evaluate(ex.gt, std::nullopt, ex.obs, sk);
    CHECK_FALSE(r.mpjpe_mm.has_value());
    CHECK(r.per_frame_mpjpe_mm.empty());
  }
  SUBCASE("JSON round trip is exact") {
    NoiseSpec n;
    n.sigma_position = 0.01;
    n.sigma_pose = 0.05;
    Rng rng(3);
    const MetricReport r = evaluate(corrupt_trajectory(ex.gt, n, rng), ex.gt, ex.obs, sk);
    const MetricReport back = io::metric_report_from_json(io::Json::parse(io::dump(io::to_json(r))));
    CHECK(back == r);
    CHECK(io::metric_table(r).find("mpjpe") != std::string::npos);
  }
}

TEST_CASE("position noise of 10 mm gives the Gaussian-norm MPJPE") {
  // Every joint of a frame shares the wrist offset, so the per-frame error
  // is |n| with n ~ N(0, sigma^2 I3): mean sigma * 2 sqrt(2 / pi).
  const double sigma = 0.01;
  const double expected_mm = 1000.0 * sigma * 2.0 * std::sqrt(2.0 / std::numbers::pi);
  CHECK(expected_mm == doctest::Approx(15.9577).epsilon(1e-4));

  // Independent Monte-Carlo estimate of E|n|.
  std::mt19937_64 mc(99);
  std::normal_distribution<double> normal(0.0, sigma);
  double acc = 0.0;
  for (int i = 0; i < 200000; ++i) acc += Eigen::Vector3d(normal(mc), normal(mc), normal(mc)).norm();
  CHECK(1000.0 * acc / 200000 == doctest::Approx(expected_mm).epsilon(0.01));

  const HandSkeleton sk = HandSkeleton::right_hand();
  MotionSpec spec = scenario::static_hand(4000);
  Rng rng(5);
  const TrajectoryParams gt = generate_sequence(spec, rng).ground_truth;
  NoiseSpec n;
  n.sigma_position = sigma;
  const double m = mpjpe(joint_trajectory(corrupt_trajectory(gt, n, rng), sk), joint_trajectory(gt, sk));
  CHECK(m >= 0.95 * expected_mm);
  CHECK(m <= 1.05 * expected_mm);
}
