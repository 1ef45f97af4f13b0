#include "handsmooth/hand_model.hpp"

#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/QR>

namespace handsmooth {

namespace {

constexpr std::uint64_t kShapeBasisSeed = 0x48414e44u;
constexpr double kShapeBasisMaxRowNorm = 0.1;

// Portable map of a 64-bit draw to [-1, 1); std::uniform_real_distribution
// is not specified bit-exactly across standard libraries.
double signed_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

Eigen::Matrix<double, kNumJoints, kNumShape, Eigen::RowMajor> make_shape_basis() {
  std::mt19937_64 rng(kShapeBasisSeed);
  Eigen::MatrixXd raw(kNumJoints - 1, kNumShape);
  for (int i = 0; i < raw.rows(); ++i) {
    for (int k = 0; k < raw.cols(); ++k) raw(i, k) = signed_unit(rng);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  const Eigen::MatrixXd q =
      qr.householderQ() * Eigen::MatrixXd::Identity(kNumJoints - 1, kNumShape);
  const double max_row = q.rowwise().norm().maxCoeff();

  Eigen::Matrix<double, kNumJoints, kNumShape, Eigen::RowMajor> basis;
  basis.row(0).setZero();
  basis.bottomRows(kNumJoints - 1) = q * (kShapeBasisMaxRowNorm / max_row);
  return basis;
}

}  // namespace

HandSkeleton HandSkeleton::right_hand() {
  HandSkeleton s;
  s.parent = {-1, 0, 1, 2, 3, 0, 5, 6, 7, 0, 9, 10, 11, 0, 13, 14, 15, 0, 17, 18, 19};
  // clang-format off
  s.rest_offset <<
       0.000,  0.000, 0.0,
       // thumb
       0.025,  0.022, 0.0,
       0.022,  0.020, 0.0,
       0.017,  0.016, 0.0,
       0.015,  0.014, 0.0,
       // index
       0.022,  0.090, 0.0,
       0.000,  0.040, 0.0,
       0.000,  0.025, 0.0,
       0.000,  0.022, 0.0,
       // middle
       0.002,  0.092, 0.0,
       0.000,  0.044, 0.0,
       0.000,  0.028, 0.0,
       0.000,  0.024, 0.0,
       // ring
      -0.018,  0.086, 0.0,
       0.000,  0.040, 0.0,
       0.000,  0.026, 0.0,
       0.000,  0.023, 0.0,
       // pinky
      -0.035,  0.078, 0.0,
       0.000,  0.032, 0.0,
       0.000,  0.020, 0.0,
       0.000,  0.020, 0.0;
  // clang-format on
  s.shape_basis = make_shape_basis();
  return s;
}

void HandSkeleton::validate() const {
  if (parent[0] != -1) throw InvalidArgument("skeleton: joint 0 must be the root");
  std::array<int, kNumJoints> children{};
  for (int j = 1; j < kNumJoints; ++j) {
    if (parent[j] < 0 || parent[j] >= j) {
      throw InvalidArgument("skeleton: parent of joint " + std::to_string(j) +
                            " is not an earlier joint");
    }
    ++children[parent[j]];
  }
  if (children[0] != kNumFingers) throw InvalidArgument("skeleton: wrist must have 5 children");
  // The pose layout assumes finger f occupies joints 4f+1 .. 4f+4 as a chain.
  for (int f = 0; f < kNumFingers; ++f) {
    const int base = 4 * f + 1;
    if (parent[base] != 0) throw InvalidArgument("skeleton: finger chains must start at the wrist");
    for (int k = 1; k < 4; ++k) {
      if (parent[base + k] != base + k - 1 || children[base + k - 1] != 1) {
        throw InvalidArgument("skeleton: finger " + std::to_string(f) + " is not a 4-joint chain");
      }
    }
    if (children[base + 3] != 0) throw InvalidArgument("skeleton: fingertips must be leaves");
  }
  if (!rest_offset.allFinite() || !shape_basis.allFinite()) {
    throw InvalidArgument("skeleton: non-finite rest offset or shape basis");
  }
  for (int j = 1; j < kNumJoints; ++j) {
    if (!(rest_offset.row(j).norm() > 0.0)) {
      throw InvalidArgument("skeleton: zero-length bone at joint " + std::to_string(j));
    }
  }
}

Eigen::Vector3d matrix_to_axis_angle(const Eigen::Matrix3d& rotation) {
  const Eigen::AngleAxisd aa(rotation);
  return aa.angle() * aa.axis();
}

Eigen::Vector3d canonicalize_axis_angle(const Eigen::Vector3d& aa) {
  const double theta = aa.norm();
  if (theta < 1e-12) return aa;
  double wrapped = std::remainder(theta, 2.0 * std::numbers::pi);
  if (wrapped <= -std::numbers::pi) wrapped += 2.0 * std::numbers::pi;
  return aa * (wrapped / theta);
}

HandSkeleton apply_shape(const HandSkeleton& skeleton, const ShapeParams& beta) {
  if (!beta.allFinite()) throw InvalidArgument("apply_shape: non-finite beta");
  HandSkeleton shaped = skeleton;
  const Eigen::Matrix<double, kNumJoints, 1> scale = bone_scales<double>(skeleton, beta);
  for (int j = 0; j < kNumJoints; ++j) shaped.rest_offset.row(j) *= scale[j];
  return shaped;
}

Eigen::Matrix<double, kNumJoints, 1> bone_lengths(const HandSkeleton& skeleton,
                                                  const Joints<double>& joints) {
  Eigen::Matrix<double, kNumJoints, 1> len = Eigen::Matrix<double, kNumJoints, 1>::Zero();
  for (int j = 1; j < kNumJoints; ++j) len[j] = (joints.row(j) - joints.row(skeleton.parent[j])).norm();
  return len;
}

}  // namespace handsmooth
