// Acceptance suite: one PASS/FAIL line per criterion.

#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "handsmooth/cli.hpp"
#include "handsmooth/io.hpp"
#include "handsmooth/metrics.hpp"
#include "handsmooth/smoother.hpp"
#include "handsmooth/synth.hpp"
#include "oracles.hpp"
#include "scenarios.hpp"

using namespace handsmooth;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = HANDSMOOTH_SOURCE_DIR;
const fs::path kFixtures = kSource / "fixtures";

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Detail {
 public:
  template <typename T>
  Detail& operator<<(const T& x) {
    s_ << x;
    return *this;
  }
  std::string str() const { return s_.str(); }

 private:
  std::ostringstream s_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double x) { return io::format_double(x); }

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("handsmooth_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "handsmooth");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  return code;
}

Outcome gradient_correctness() {
  const auto start = std::chrono::steady_clock::now();
  std::string text;
  const int code = run_cli({"gradcheck", "--frames", "5", "--views", "2", "--seeds", "100", "--tolerance", "1e-4",
                            "--step", "1e-6"},
                           &text);
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = code == 0 && elapsed < 60.0;
  const auto pos = text.find("max_rel_err");
  const std::string line = pos == std::string::npos ? text : text.substr(pos, text.find('\n', pos) - pos);
  o.detail = line + ", " + fmt(std::round(elapsed * 100) / 100) + " s (limit 60 s)";
  return o;
}

Outcome formula_exactness() {
  Outcome o;
  Detail d;
  const double constant = acceleration_loss(Eigen::MatrixXd::Constant(10, 45, 0.3));
  Eigen::MatrixXd ramp(10, 3);
  for (int t = 0; t < 10; ++t) ramp.row(t) = Eigen::RowVector3d(0.5, -1.0, 0.25) * t;
  const double linear = acceleration_loss(ramp);
  Eigen::MatrixXd step(3, 1);
  step << 0.0, 0.0, 1.0;
  const double unit = acceleration_loss(step);
  o.pass = constant <= 1e-8 && linear <= 1e-8 && std::abs(unit - 1.0) <= 1e-8;
  d << "constant " << fmt(constant) << ", ramp " << fmt(linear) << ", [0,0,1] " << fmt(unit);

  const LossWeights w;
  o.pass = o.pass && w.pose == 0.5 && w.orients == 0.5 && w.position == 0.5 && w.reprojection == 1.0;

  const HandSkeleton sk = HandSkeleton::right_hand();
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const auto p = random_problem(6, 2, seed);
    const int n = p.params.num_frames();
    Eigen::MatrixXd pose(n, 45), orient(n, 3), position(n, 3);
    for (int t = 0; t < n; ++t) {
      orient.row(t) = p.params.frames[t].global_orient.transpose();
      position.row(t) = p.params.frames[t].position.transpose();
      for (int k = 0; k < kNumArticulated; ++k) pose.block<1, 3>(t, 3 * k) = p.params.frames[t].joint_rotations.row(k);
    }
    const double expected = 0.5 * oracle::acceleration_loss(pose) + 0.5 * oracle::acceleration_loss(orient) +
                            0.5 * oracle::acceleration_loss(position) +
                            1.0 * oracle::reprojection_loss(p.params, p.obs, sk);
    worst = std::max(worst, std::abs(total_loss(p.params, p.obs, sk) - expected) / std::abs(expected));
  }
  o.pass = o.pass && worst <= 1e-12;
  d << "; weights (0.5, 0.5, 0.5, 1); composition rel err " << fmt(worst) << " (limit 1e-12)";
  o.detail = d.str();
  return o;
}

Outcome fixed_point() {
  const MotionSpec spec = io::motion_spec_from_json(io::Json::parse(io::read_text(kFixtures / "fixed_point_motion.json")));
  const scenario::Exact ex = scenario::exact(spec);
  const SmootherConfig config;  // 500 iterations, weight decay 0
  const SmoothResult r = smooth(ex.gt, ex.obs, HandSkeleton::right_hand(), config);
  const double drift = (r.refined.flatten() - ex.gt.flatten()).cwiseAbs().maxCoeff();
  double worst_loss = 0.0;
  for (const LossEntry& e : r.report.entries) worst_loss = std::max(worst_loss, e.total);
  Outcome o;
  o.pass = drift <= 1e-4 && worst_loss < 1e-8 && config.weight_decay == 0.0 && config.max_iters == 500 &&
           r.report.entries.size() == 501;
  o.detail = "max |refined - initial| " + fmt(drift) + " (limit 1e-4), max loss " + fmt(worst_loss) +
             " (limit 1e-8), " + std::to_string(spec.num_frames) + " frames";
  return o;
}

Outcome smoothing_efficacy() {
  const auto start = std::chrono::steady_clock::now();
  const io::SequenceFile file = io::load_sequence(kFixtures / "acceptance_sequence.json");
  const NoiseSpec noise = io::noise_spec_from_json(io::Json::parse(io::read_text(kFixtures / "acceptance_noise.json")));
  const SmoothResult r = smooth(file.init, file.observations, file.skeleton, SmootherConfig{}, file.ground_truth);
  const double elapsed = seconds_since(start);
  const MetricReport& a = *r.report.initial_metrics;
  const MetricReport& b = *r.report.final_metrics;
  Outcome o;
  o.pass = file.num_frames() == 60 && file.rig().num_views() == 2 && noise.sigma_position == 0.01 &&
           noise.sigma_pose == 0.05 && noise.sigma_orient == 0.05 && noise.sigma_pixel == 0.0 &&
           noise.visibility_dropout == 0.0 && *b.mpjpe_mm < *a.mpjpe_mm &&
           b.accel_error_mm < 0.5 * a.accel_error_mm && b.reproj_px < 0.1 * a.reproj_px && elapsed < 300.0;
  Detail d;
  d << "MPJPE " << fmt(*a.mpjpe_mm) << " -> " << fmt(*b.mpjpe_mm) << " mm; accel " << fmt(a.accel_error_mm) << " -> "
    << fmt(b.accel_error_mm) << " mm/f^2 (ratio " << fmt(b.accel_error_mm / a.accel_error_mm) << ", limit 0.5); reproj "
    << fmt(a.reproj_px) << " -> " << fmt(b.reproj_px) << " px (ratio " << fmt(b.reproj_px / a.reproj_px)
    << ", limit 0.1); " << fmt(std::round(elapsed * 100) / 100) << " s (limit 300 s)";
  o.detail = d.str();
  return o;
}

Outcome perturbation_statistics() {
  Rng rng(20240501);
  const Extrinsics base = look_at(Eigen::Vector3d(0.1, 0.2, 0.5), Eigen::Vector3d::Zero());
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(INFINITY);
  Eigen::Vector3d hi = Eigen::Vector3d::Constant(-INFINITY);
  const int n = 100000;
  bool rotation_fixed = true;
  for (int i = 0; i < n; ++i) {
    const Extrinsics p = perturb_extrinsics(base, rng, 0.5);
    const Eigen::Vector3d d = p.translation - base.translation;
    rotation_fixed = rotation_fixed && p.rotation == base.rotation;
    sum += d;
    lo = lo.cwiseMin(d);
    hi = hi.cwiseMax(d);
  }
  const Eigen::Vector3d mean = sum / n;
  Outcome o;
  o.pass = rotation_fixed && (lo.array() > -0.5).all() && (hi.array() < 0.5).all() &&
           (mean.cwiseAbs().array() <= 0.01).all();
  Detail d;
  d << "min (" << fmt(lo.x()) << ", " << fmt(lo.y()) << ", " << fmt(lo.z()) << "), max (" << fmt(hi.x()) << ", "
    << fmt(hi.y()) << ", " << fmt(hi.z()) << "), |mean| max " << fmt(mean.cwiseAbs().maxCoeff()) << " m (limit 0.01)";
  o.detail = d.str();
  return o;
}

Outcome mirroring() {
  const HandSkeleton right = HandSkeleton::right_hand();
  const HandSkeleton left = mirror_skeleton(right);
  double involution = 0.0;
  double commute = 0.0;
  auto check = [&](const TrajectoryParams& traj, const SequenceObservation& obs) {
    const auto once = mirror_hand(traj, obs);
    const auto twice = mirror_hand(once.first, once.second);
    involution = std::max(involution, (twice.first.flatten() - traj.flatten()).cwiseAbs().maxCoeff());
    for (int v = 0; v < obs.num_views(); ++v) {
      const Extrinsics& x = twice.second.rig.views[v].extrinsics;
      const Extrinsics& y = obs.rig.views[v].extrinsics;
      involution = std::max(involution, (x.rotation - y.rotation).cwiseAbs().maxCoeff());
      involution = std::max(involution, (x.translation - y.translation).cwiseAbs().maxCoeff());
    }
    for (std::size_t i = 0; i < obs.landmarks.size(); ++i) {
      involution = std::max(involution, (twice.second.landmarks[i] - obs.landmarks[i]).cwiseAbs().maxCoeff());
      if (twice.second.visible[i] != obs.visible[i]) involution = INFINITY;
    }
    for (int t = 0; t < traj.num_frames(); ++t) {
      const Joints<double> mirrored = forward_kinematics<double>(left, once.first.shape, once.first.frames[t]);
      const Joints<double> brute = reflect_joints(oracle::forward_kinematics(right, traj.shape, traj.frames[t]));
      commute = std::max(commute, (mirrored - brute).cwiseAbs().maxCoeff());
    }
  };
  const io::SequenceFile file = io::load_sequence(kFixtures / "acceptance_sequence.json");
  check(file.init, file.observations);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = random_problem(5, 3, seed);
    check(p.params, p.obs);
  }
  Outcome o;
  o.pass = involution <= 1e-12 && commute <= 1e-10;
  o.detail = "involution max err " + fmt(involution) + " (limit 1e-12), FK commutation max err " + fmt(commute) +
             " m (limit 1e-10)";
  return o;
}

Outcome determinism_and_round_trip() {
  const fs::path dir = scratch_dir();
  const std::string motion = (kFixtures / "demo_motion.json").string();
  const std::string noise = (kFixtures / "acceptance_noise.json").string();
  bool ok = true;
  Detail d;

  const std::string a = (dir / "gen_a.json").string(), b = (dir / "gen_b.json").string();
  ok = ok && run_cli({"generate", motion, noise, a, "--seed", "11"}) == 0;
  ok = ok && run_cli({"generate", motion, noise, b, "--seed", "11"}) == 0;
  const bool gen_same = ok && io::read_text(a) == io::read_text(b);
  d << "generate identical: " << (gen_same ? "yes" : "no");

  const std::string small = (kFixtures / "small_sequence.json").string();
  const std::string sa = (dir / "sm_a.json").string(), sb = (dir / "sm_b.json").string();
  const std::string ra = (dir / "rep_a.json").string(), rb = (dir / "rep_b.json").string();
  const std::string ca = (dir / "rep_a.csv").string(), cb = (dir / "rep_b.csv").string();
  bool smooth_ok = run_cli({"smooth", small, sa, "--report", ra}) == 0 && run_cli({"smooth", small, sb, "--report", rb}) == 0 &&
                   run_cli({"smooth", small, sa, "--report", ca}) == 0 && run_cli({"smooth", small, sb, "--report", cb}) == 0;
  const bool smooth_same = smooth_ok && io::read_text(sa) == io::read_text(sb) && io::read_text(ra) == io::read_text(rb) &&
                           io::read_text(ca) == io::read_text(cb);
  d << "; smooth + reports identical: " << (smooth_same ? "yes" : "no");

  int fixtures = 0;
  int round_trips = 0;
  for (const auto& entry : fs::directory_iterator(kFixtures)) {
    if (entry.path().extension() != ".json") continue;
    const std::string text = io::read_text(entry.path());
    const io::Json j = io::Json::parse(text);
    if (j.value("version", "") != io::kSequenceVersion) continue;
    ++fixtures;
    const io::SequenceFile x = io::load_sequence(entry.path());
    const fs::path copy = dir / entry.path().filename();
    io::save_sequence(copy, x);
    const io::SequenceFile y = io::load_sequence(copy);
    if (y == x && io::read_text(copy) == text) ++round_trips;
  }
  d << "; load(save(x)) = x on " << round_trips << "/" << fixtures << " sequence fixtures";

  Outcome o;
  o.pass = gen_same && smooth_same && fixtures > 0 && round_trips == fixtures;
  o.detail = d.str();
  return o;
}

Outcome cosine_endpoints() {
  const SmootherConfig c;
  const double lr0 = cosine_lr(0, c);
  const double lr_end = cosine_lr(c.max_iters, c);
  const double lr_mid = cosine_lr(c.max_iters / 2, c);
  Outcome o;
  o.pass = lr0 == 1e-2 && lr_end == 0.0 && lr_mid == 5e-3;
  o.detail = "lr(0) " + fmt(lr0) + ", lr(" + std::to_string(c.max_iters) + ") " + fmt(lr_end) + ", lr(" +
             std::to_string(c.max_iters / 2) + ") " + fmt(lr_mid);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 gradient correctness", gradient_correctness},
      {"2 formula exactness", formula_exactness},
      {"3 fixed point", fixed_point},
      {"4 smoothing efficacy", smoothing_efficacy},
      {"5 extrinsic perturbation statistics", perturbation_statistics},
      {"6 mirroring", mirroring},
      {"7 determinism and round trip", determinism_and_round_trip},
      {"8 cosine schedule endpoints", cosine_endpoints},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failures) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
