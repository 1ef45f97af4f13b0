#include "doctest.h"

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "handsmooth/io.hpp"
#include "handsmooth/smoother.hpp"
#include "handsmooth/synth.hpp"
#include "scenarios.hpp"

using namespace handsmooth;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const fs::path dir = fs::temp_directory_path() / ("handsmooth_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

io::SequenceFile sample_file() {
  const auto problem = random_problem(5, 2, 17);
  io::SequenceFile f;
  f.init = problem.params;
  f.observations = problem.obs;
  f.observations.visible_at(1, 1)[4] = false;
  TrajectoryParams gt = problem.params;
  gt.frames[0].position.x() += 1.0 / 3.0;
  f.ground_truth = gt;
  return f;
}

const fs::path kFixtures = fs::path(HANDSMOOTH_SOURCE_DIR) / "fixtures";

}  // namespace

TEST_CASE("shortest round-trip doubles") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng) * std::pow(10.0, static_cast<int>(u(rng)) % 20);
    CHECK(std::stod(io::format_double(x)) == x);
  }
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(1e-2) == "0.01");
  CHECK(io::format_double(0.0) == "0");
}

TEST_CASE("sequence files round-trip exactly") {
  const io::SequenceFile f = sample_file();
  const fs::path path = scratch_dir() / "roundtrip.json";
  io::save_sequence(path, f);
  const io::SequenceFile back = io::load_sequence(path);
  CHECK(back == f);
  io::save_sequence(path, back);
  CHECK(io::read_text(path) == io::dump(io::to_json(f)));
}

TEST_CASE("inline and referenced hand models") {
  const fs::path dir = scratch_dir();
  io::SequenceFile f = sample_file();
  SUBCASE("inline") {
    f.model_ref.clear();
    f.skeleton = apply_shape(HandSkeleton::right_hand(), ShapeParams::Constant(0.2));
    io::save_sequence(dir / "inline.json", f);
    const io::SequenceFile back = io::load_sequence(dir / "inline.json");
    CHECK(back.model_ref.empty());
    CHECK(back.skeleton == f.skeleton);
  }
  SUBCASE("path relative to the sequence file") {
    fs::create_directories(dir / "models");
    io::write_text(dir / "models" / "hand.json", io::dump(io::to_json(HandSkeleton::right_hand())));
    f.model_ref = "models/hand.json";
    io::save_sequence(dir / "ref.json", f);
    const io::SequenceFile back = io::load_sequence(dir / "ref.json");
    CHECK(back.model_ref == "models/hand.json");
    CHECK(back.skeleton == HandSkeleton::right_hand());
  }
  SUBCASE("missing model file") {
    f.model_ref = "nowhere/hand.json";
    io::save_sequence(dir / "missing.json", f);
    CHECK_THROWS_AS(io::load_sequence(dir / "missing.json"), SchemaError);
  }
}

TEST_CASE("schema violations are reported as SchemaError") {
  const io::Json good = io::to_json(sample_file());
  auto expect_error = [](io::Json j) { CHECK_THROWS_AS(io::sequence_from_json(j), SchemaError); };
  SUBCASE("unknown version") {
    io::Json j = good;
    j["version"] = "handsmooth.sequence/9";
    expect_error(j);
  }
  SUBCASE("missing field") {
    io::Json j = good;
    j.erase("rig");
    expect_error(j);
  }
  SUBCASE("wrong frame count") {
    io::Json j = good;
    j["num_frames"] = 6;
    expect_error(j);
  }
  SUBCASE("wrong vector length") {
    io::Json j = good;
    j["init"]["frames"][0]["position"] = {1.0, 2.0};
    expect_error(j);
  }
  SUBCASE("wrong type") {
    io::Json j = good;
    j["init"]["frames"][0]["position"][1] = "x";
    expect_error(j);
  }
  SUBCASE("non-orthonormal rotation") {
    io::Json j = good;
    j["rig"]["views"][0]["rotation"][0] = 2.0;
    expect_error(j);
  }
  SUBCASE("too few frames") {
    io::Json j = good;
    j["num_frames"] = 2;
    expect_error(j);
  }
  SUBCASE("nothing visible") {
    io::Json j = good;
    for (auto& frame : j["observations"]["frames"]) {
      for (auto& view : frame) {
        for (auto& b : view["visible"]) b = false;
      }
    }
    CHECK_THROWS(io::sequence_from_json(j));
  }
  SUBCASE("not JSON at all") {
    const fs::path path = scratch_dir() / "garbage.json";
    io::write_text(path, "{ not json");
    CHECK_THROWS_AS(io::load_sequence(path), SchemaError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(io::load_sequence(scratch_dir() / "absent.json"), SchemaError); }
}

TEST_CASE("motion and noise specs round-trip") {
  MotionSpec m = MotionSpec::demo();
  m.wrist.kind = WristPath::Kind::arc;
  m.wrist.radius = 0.04;
  m.rig.target = Eigen::Vector3d(0.01, 0.07, 0.0);
  m.randomize_phase = true;
  CHECK(io::motion_spec_from_json(io::Json::parse(io::dump(io::to_json(m)))) == m);

  NoiseSpec n{0.01, 0.05, 0.05, 1.5, 0.1, 12345678901234ull};
  CHECK(io::noise_spec_from_json(io::Json::parse(io::dump(io::to_json(n)))) == n);

  io::Json bad = io::to_json(n);
  bad["visibility_dropout"] = 1.5;
  CHECK_THROWS_AS(io::noise_spec_from_json(bad), SchemaError);
  bad = io::to_json(m);
  bad["num_frames"] = 1;
  CHECK_THROWS_AS(io::motion_spec_from_json(bad), SchemaError);
}

TEST_CASE("hand model round-trip") {
  const HandSkeleton s = apply_shape(HandSkeleton::right_hand(), ShapeParams::Constant(-0.4));
  CHECK(io::skeleton_from_json(io::Json::parse(io::dump(io::to_json(s)))) == s);
  io::Json bad = io::to_json(s);
  bad["parents"][5] = 7;
  CHECK_THROWS_AS(io::skeleton_from_json(bad), SchemaError);
}

TEST_CASE("loss report JSON and CSV") {
  const auto problem = random_problem(5, 2, 3);
  SmootherConfig c;
  c.max_iters = 4;
  const LossReport r = smooth(problem.params, problem.obs, HandSkeleton::right_hand(), c, problem.params).report;
  CHECK(io::loss_report_from_json(io::Json::parse(io::dump(io::to_json(r)))) == r);

  const std::string csv = io::loss_report_csv(r);
  const std::string header = "iteration,lr,total,acce_pose,acce_orients,acce_position,loss_2d\n";
  REQUIRE(csv.rfind(header, 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  const std::string second = csv.substr(header.size(), csv.find('\n', header.size()) - header.size());
  CHECK(second.rfind("0,0.01,", 0) == 0);
}

TEST_CASE("committed fixtures load and re-serialize byte-identically") {
  int checked = 0;
  for (const auto& entry : fs::directory_iterator(kFixtures)) {
    if (entry.path().extension() != ".json") continue;
    const std::string text = io::read_text(entry.path());
    const io::Json j = io::Json::parse(text);
    const std::string version = j.at("version").get<std::string>();
    CAPTURE(entry.path().filename().string());
    std::string again;
    if (version == io::kSequenceVersion) {
      again = io::dump(io::to_json(io::load_sequence(entry.path())));
    } else if (version == io::kMotionVersion) {
      again = io::dump(io::to_json(io::motion_spec_from_json(j)));
    } else if (version == io::kNoiseVersion) {
      again = io::dump(io::to_json(io::noise_spec_from_json(j)));
    } else if (version == io::kReportVersion) {
      again = io::dump(io::to_json(io::loss_report_from_json(j)));
    } else if (version == io::kMetricsVersion) {
      again = io::dump(io::to_json(io::metric_report_from_json(j)));
    } else if (version == io::kModelVersion) {
      again = io::dump(io::to_json(io::skeleton_from_json(j)));
    } else {
      FAIL("unknown fixture version " << version);
    }
    CHECK(again == text);
    ++checked;
  }
  CHECK(checked >= 8);
}
