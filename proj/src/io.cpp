#include "handsmooth/io.hpp"

#include <charconv>
#include <fstream>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace handsmooth::io {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw SchemaError(where + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(where, std::string("missing field '") + key + "'");
  return *it;
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

double number_or(const Json& j, const char* key, double fallback, const std::string& where) {
  const auto it = j.find(key);
  return it == j.end() ? fallback : number(*it, where + "." + key);
}

int integer(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

bool boolean(const Json& j, const std::string& where) {
  if (!j.is_boolean()) fail(where, "expected a boolean");
  return j.get<bool>();
}

const Json& array(const Json& j, std::size_t size, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  if (j.size() != size) {
    fail(where, "expected " + std::to_string(size) + " entries, got " + std::to_string(j.size()));
  }
  return j;
}

template <int N>
Eigen::Matrix<double, N, 1> vec(const Json& j, const std::string& where) {
  array(j, N, where);
  Eigen::Matrix<double, N, 1> v;
  for (int i = 0; i < N; ++i) v[i] = number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

template <typename Derived>
Json to_array(const Eigen::MatrixBase<Derived>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v.derived()(i));
  return out;
}

void check_version(const Json& j, const char* expected, const std::string& where) {
  const Json& v = field(j, "version", where);
  if (!v.is_string() || v.get<std::string>() != expected) {
    fail(where, std::string("unrecognized version (expected '") + expected + "')");
  }
}

// Converts library exceptions raised while parsing into SchemaError.
template <typename F>
auto guarded(const std::string& where, F&& parse) {
  try {
    return parse();
  } catch (const SchemaError&) {
    throw;
  } catch (const nlohmann::json::exception& e) {
    fail(where, e.what());
  } catch (const Error& e) {
    fail(where, e.what());
  }
}

Json sinusoid_to_json(const Sinusoid& s) {
  return {{"base", to_array(s.base)},
          {"amplitude", to_array(s.amplitude)},
          {"frequency_hz", s.frequency_hz},
          {"phase", s.phase}};
}

Sinusoid sinusoid_from_json(const Json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  Sinusoid s;
  if (j.contains("base")) s.base = vec<3>(j["base"], where + ".base");
  if (j.contains("amplitude")) s.amplitude = vec<3>(j["amplitude"], where + ".amplitude");
  s.frequency_hz = number_or(j, "frequency_hz", 0.0, where);
  s.phase = number_or(j, "phase", 0.0, where);
  return s;
}

Json intrinsics_to_json(const Intrinsics& in) {
  return Json::array({in.fx, in.fy, in.cx, in.cy, in.width, in.height});
}

Intrinsics intrinsics_from_json(const Json& j, const std::string& where) {
  const Eigen::Matrix<double, 6, 1> v = vec<6>(j, where);
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

Json metrics_or_null(const std::optional<MetricReport>& m) { return m ? to_json(*m) : Json(nullptr); }

std::optional<MetricReport> optional_metrics(const Json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return metric_report_from_json(*it);
}

// Loss values of a diverged run may be non-finite; JSON has no such
// numbers, so they are stored as null and read back as NaN.
Json loss_value(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

double loss_value_from_json(const Json& j, const std::string& where) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : number(j, where);
}

std::vector<double> number_list(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw SchemaError("write to '" + path.string() + "' failed");
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

// --- hand model -----------------------------------------------------------

Json to_json(const HandSkeleton& skeleton) {
  Json j;
  j["version"] = kModelVersion;
  j["name"] = skeleton.version;
  j["parents"] = skeleton.parent;
  Json offsets = Json::array();
  Json basis = Json::array();
  for (int r = 0; r < kNumJoints; ++r) {
    offsets.push_back(to_array(skeleton.rest_offset.row(r)));
    basis.push_back(to_array(skeleton.shape_basis.row(r)));
  }
  j["rest_offsets"] = offsets;
  j["shape_basis"] = basis;
  return j;
}

HandSkeleton skeleton_from_json(const Json& j) {
  const std::string where = "model";
  return guarded(where, [&] {
    check_version(j, kModelVersion, where);
    HandSkeleton s;
    if (j.contains("name")) s.version = j["name"].get<std::string>();
    const Json& parents = array(field(j, "parents", where), kNumJoints, where + ".parents");
    for (int i = 0; i < kNumJoints; ++i) s.parent[i] = integer(parents[i], where + ".parents");
    const Json& offsets = array(field(j, "rest_offsets", where), kNumJoints, where + ".rest_offsets");
    const Json& basis = array(field(j, "shape_basis", where), kNumJoints, where + ".shape_basis");
    for (int r = 0; r < kNumJoints; ++r) {
      s.rest_offset.row(r) = vec<3>(offsets[r], where + ".rest_offsets").transpose();
      s.shape_basis.row(r) = vec<kNumShape>(basis[r], where + ".shape_basis").transpose();
    }
    s.validate();
    return s;
  });
}

HandSkeleton load_hand_model(const std::filesystem::path& path) {
  return guarded(path.string(), [&] { return skeleton_from_json(Json::parse(read_text(path))); });
}

// --- rig ------------------------------------------------------------------

Json to_json(const CameraRig& rig) {
  Json views = Json::array();
  for (const Camera& c : rig.views) {
    Json rotation = Json::array();
    for (int r = 0; r < 3; ++r) {
      for (int col = 0; col < 3; ++col) rotation.push_back(c.extrinsics.rotation(r, col));
    }
    views.push_back({{"intrinsics", intrinsics_to_json(c.intrinsics)},
                     {"rotation", rotation},
                     {"translation", to_array(c.extrinsics.translation)}});
  }
  return {{"views", views}};
}

CameraRig rig_from_json(const Json& j) {
  const std::string where = "rig";
  return guarded(where, [&] {
    const Json& views = field(j, "views", where);
    if (!views.is_array() || views.empty()) fail(where, "views must be a non-empty array");
    CameraRig rig;
    for (std::size_t v = 0; v < views.size(); ++v) {
      const std::string w = where + ".views[" + std::to_string(v) + "]";
      Camera c;
      c.intrinsics = intrinsics_from_json(field(views[v], "intrinsics", w), w + ".intrinsics");
      const Eigen::Matrix<double, 9, 1> r = vec<9>(field(views[v], "rotation", w), w + ".rotation");
      for (int i = 0; i < 9; ++i) c.extrinsics.rotation(i / 3, i % 3) = r[i];
      c.extrinsics.translation = vec<3>(field(views[v], "translation", w), w + ".translation");
      rig.views.push_back(c);
    }
    rig.validate();
    return rig;
  });
}

// --- trajectory -----------------------------------------------------------

Json to_json(const TrajectoryParams& traj) {
  Json frames = Json::array();
  for (const FramePose<double>& f : traj.frames) {
    Json rotations = Json::array();
    for (int k = 0; k < kNumArticulated; ++k) rotations.push_back(to_array(f.joint_rotations.row(k)));
    frames.push_back({{"global_orient", to_array(f.global_orient)},
                      {"position", to_array(f.position)},
                      {"joint_rotations", rotations}});
  }
  return {{"shape", to_array(traj.shape)}, {"frames", frames}};
}

TrajectoryParams trajectory_from_json(const Json& j) {
  const std::string where = "trajectory";
  return guarded(where, [&] {
    TrajectoryParams traj;
    traj.shape = vec<kNumShape>(field(j, "shape", where), where + ".shape");
    const Json& frames = field(j, "frames", where);
    if (!frames.is_array()) fail(where, "frames must be an array");
    for (std::size_t t = 0; t < frames.size(); ++t) {
      const std::string w = where + ".frames[" + std::to_string(t) + "]";
      FramePose<double> f;
      f.global_orient = vec<3>(field(frames[t], "global_orient", w), w + ".global_orient");
      f.position = vec<3>(field(frames[t], "position", w), w + ".position");
      const Json& rot = array(field(frames[t], "joint_rotations", w), kNumArticulated, w + ".joint_rotations");
      for (int k = 0; k < kNumArticulated; ++k) f.joint_rotations.row(k) = vec<3>(rot[k], w).transpose();
      traj.frames.push_back(f);
    }
    traj.validate();
    return traj;
  });
}

// --- observations ---------------------------------------------------------

Json observations_to_json(const SequenceObservation& obs) {
  Json frames = Json::array();
  for (int t = 0; t < obs.num_frames; ++t) {
    Json views = Json::array();
    for (int v = 0; v < obs.num_views(); ++v) {
      Json landmarks = Json::array();
      const auto& l = obs.landmarks_at(t, v);
      for (int j = 0; j < kNumJoints; ++j) landmarks.push_back(Json::array({l(j, 0), l(j, 1)}));
      views.push_back({{"landmarks", landmarks}, {"visible", obs.visible_at(t, v)}});
    }
    frames.push_back(views);
  }
  return {{"frames", frames}};
}

SequenceObservation observations_from_json(const Json& j, int num_frames, CameraRig rig) {
  const std::string where = "observations";
  return guarded(where, [&] {
    const int views = rig.num_views();
    SequenceObservation obs(num_frames, std::move(rig));
    const Json& frames = array(field(j, "frames", where), static_cast<std::size_t>(num_frames), where + ".frames");
    for (int t = 0; t < num_frames; ++t) {
      const std::string wf = where + ".frames[" + std::to_string(t) + "]";
      array(frames[t], static_cast<std::size_t>(views), wf);
      for (int v = 0; v < views; ++v) {
        const std::string w = wf + "[" + std::to_string(v) + "]";
        const Json& lm = array(field(frames[t][v], "landmarks", w), kNumJoints, w + ".landmarks");
        const Json& vis = array(field(frames[t][v], "visible", w), kNumJoints, w + ".visible");
        for (int k = 0; k < kNumJoints; ++k) {
          obs.landmarks_at(t, v).row(k) = vec<2>(lm[k], w + ".landmarks").transpose();
          obs.visible_at(t, v)[k] = boolean(vis[k], w + ".visible");
        }
      }
    }
    obs.validate();
    return obs;
  });
}

// --- sequence file --------------------------------------------------------

void SequenceFile::validate() const {
  skeleton.validate();
  init.validate();
  observations.validate();
  if (observations.num_frames != init.num_frames()) {
    throw SchemaError("sequence: observations and init have different frame counts");
  }
  if (ground_truth) {
    ground_truth->validate();
    if (ground_truth->num_frames() != init.num_frames()) {
      throw SchemaError("sequence: ground_truth and init have different frame counts");
    }
  }
}

Json to_json(const SequenceFile& file) {
  Json j;
  j["version"] = file.version;
  if (file.model_ref.empty()) {
    j["model"] = to_json(file.skeleton);
  } else {
    j["model"] = file.model_ref;
  }
  j["num_frames"] = file.num_frames();
  j["rig"] = to_json(file.rig());
  j["init"] = to_json(file.init);
  j["observations"] = observations_to_json(file.observations);
  if (file.ground_truth) j["ground_truth"] = to_json(*file.ground_truth);
  return j;
}

SequenceFile sequence_from_json(const Json& j, const std::filesystem::path& base_dir) {
  const std::string where = "sequence";
  return guarded(where, [&] {
    check_version(j, kSequenceVersion, where);
    SequenceFile file;
    const Json& model = field(j, "model", where);
    if (model.is_string()) {
      file.model_ref = model.get<std::string>();
      if (file.model_ref == kBuiltinModel) {
        file.skeleton = HandSkeleton::right_hand();
      } else {
        std::filesystem::path p(file.model_ref);
        if (p.is_relative()) p = base_dir / p;
        file.skeleton = load_hand_model(p);
      }
    } else {
      file.model_ref.clear();
      file.skeleton = skeleton_from_json(model);
    }
    const int n = integer(field(j, "num_frames", where), where + ".num_frames");
    if (n < 3) fail(where, "num_frames must be at least 3");
    file.init = trajectory_from_json(field(j, "init", where));
    if (file.init.num_frames() != n) fail(where, "init frame count differs from num_frames");
    file.observations = observations_from_json(field(j, "observations", where), n, rig_from_json(field(j, "rig", where)));
    if (j.contains("ground_truth") && !j["ground_truth"].is_null()) {
      file.ground_truth = trajectory_from_json(j["ground_truth"]);
    }
    file.validate();
    return file;
  });
}

SequenceFile load_sequence(const std::filesystem::path& path) {
  return guarded(path.string(), [&] {
    return sequence_from_json(Json::parse(read_text(path)), path.parent_path());
  });
}

void save_sequence(const std::filesystem::path& path, const SequenceFile& file) {
  write_text(path, dump(to_json(file)));
}

// --- motion / noise specs ---------------------------------------------------

Json to_json(const MotionSpec& spec) {
  Json joints = Json::array();
  for (const Sinusoid& s : spec.joints) joints.push_back(sinusoid_to_json(s));
  Json rig = {{"views", spec.rig.views},
              {"radius", spec.rig.radius},
              {"elevation_deg", spec.rig.elevation_deg},
              {"azimuth_span_deg", spec.rig.azimuth_span_deg},
              {"intrinsics", intrinsics_to_json(spec.rig.intrinsics)}};
  if (spec.rig.target) rig["target"] = to_array(*spec.rig.target);
  return {{"version", kMotionVersion},
          {"num_frames", spec.num_frames},
          {"fps", spec.fps},
          {"randomize_phase", spec.randomize_phase},
          {"joints", joints},
          {"orient", sinusoid_to_json(spec.orient)},
          {"wrist",
           {{"kind", spec.wrist.kind == WristPath::Kind::line ? "line" : "arc"},
            {"start", to_array(spec.wrist.start)},
            {"direction", to_array(spec.wrist.direction)},
            {"radius", spec.wrist.radius},
            {"speed", spec.wrist.speed}}},
          {"shape", to_array(spec.shape)},
          {"rig", rig}};
}

MotionSpec motion_spec_from_json(const Json& j) {
  const std::string where = "motion";
  return guarded(where, [&] {
    check_version(j, kMotionVersion, where);
    MotionSpec spec;
    spec.num_frames = integer(field(j, "num_frames", where), where + ".num_frames");
    spec.fps = number(field(j, "fps", where), where + ".fps");
    if (j.contains("randomize_phase")) spec.randomize_phase = boolean(j["randomize_phase"], where + ".randomize_phase");
    if (j.contains("joints")) {
      const Json& joints = array(j["joints"], kNumArticulated, where + ".joints");
      for (int k = 0; k < kNumArticulated; ++k) {
        spec.joints[k] = sinusoid_from_json(joints[k], where + ".joints[" + std::to_string(k) + "]");
      }
    }
    if (j.contains("orient")) spec.orient = sinusoid_from_json(j["orient"], where + ".orient");
    if (j.contains("wrist")) {
      const Json& w = j["wrist"];
      const std::string ww = where + ".wrist";
      const std::string kind = w.value("kind", std::string("line"));
      if (kind == "line") {
        spec.wrist.kind = WristPath::Kind::line;
      } else if (kind == "arc") {
        spec.wrist.kind = WristPath::Kind::arc;
      } else {
        fail(ww, "kind must be 'line' or 'arc'");
      }
      if (w.contains("start")) spec.wrist.start = vec<3>(w["start"], ww + ".start");
      if (w.contains("direction")) spec.wrist.direction = vec<3>(w["direction"], ww + ".direction");
      spec.wrist.radius = number_or(w, "radius", 0.0, ww);
      spec.wrist.speed = number_or(w, "speed", 0.0, ww);
    }
    if (j.contains("shape")) spec.shape = vec<kNumShape>(j["shape"], where + ".shape");
    if (j.contains("rig")) {
      const Json& r = j["rig"];
      const std::string wr = where + ".rig";
      if (r.contains("views")) spec.rig.views = integer(r["views"], wr + ".views");
      spec.rig.radius = number_or(r, "radius", spec.rig.radius, wr);
      spec.rig.elevation_deg = number_or(r, "elevation_deg", spec.rig.elevation_deg, wr);
      spec.rig.azimuth_span_deg = number_or(r, "azimuth_span_deg", spec.rig.azimuth_span_deg, wr);
      if (r.contains("intrinsics")) spec.rig.intrinsics = intrinsics_from_json(r["intrinsics"], wr + ".intrinsics");
      if (r.contains("target")) spec.rig.target = vec<3>(r["target"], wr + ".target");
    }
    spec.validate();
    return spec;
  });
}

Json to_json(const NoiseSpec& spec) {
  return {{"version", kNoiseVersion},
          {"sigma_position", spec.sigma_position},
          {"sigma_orient", spec.sigma_orient},
          {"sigma_pose", spec.sigma_pose},
          {"sigma_pixel", spec.sigma_pixel},
          {"visibility_dropout", spec.visibility_dropout},
          {"seed", spec.seed}};
}

NoiseSpec noise_spec_from_json(const Json& j) {
  const std::string where = "noise";
  return guarded(where, [&] {
    check_version(j, kNoiseVersion, where);
    NoiseSpec spec;
    spec.sigma_position = number_or(j, "sigma_position", 0.0, where);
    spec.sigma_orient = number_or(j, "sigma_orient", 0.0, where);
    spec.sigma_pose = number_or(j, "sigma_pose", 0.0, where);
    spec.sigma_pixel = number_or(j, "sigma_pixel", 0.0, where);
    spec.visibility_dropout = number_or(j, "visibility_dropout", 0.0, where);
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) fail(where + ".seed", "expected a non-negative integer");
      spec.seed = j["seed"].get<std::uint64_t>();
    }
    spec.validate();
    return spec;
  });
}

// --- reports --------------------------------------------------------------

Json to_json(const MetricReport& report) {
  return {{"version", kMetricsVersion},
          {"mpjpe_mm", report.mpjpe_mm ? Json(*report.mpjpe_mm) : Json(nullptr)},
          {"accel_error_mm", report.accel_error_mm},
          {"reproj_px", report.reproj_px},
          {"per_frame_mpjpe_mm", report.per_frame_mpjpe_mm},
          {"per_frame_accel_mm", report.per_frame_accel_mm}};
}

MetricReport metric_report_from_json(const Json& j) {
  const std::string where = "metrics";
  return guarded(where, [&] {
    check_version(j, kMetricsVersion, where);
    MetricReport r;
    const Json& mpjpe = field(j, "mpjpe_mm", where);
    if (!mpjpe.is_null()) r.mpjpe_mm = number(mpjpe, where + ".mpjpe_mm");
    r.accel_error_mm = number(field(j, "accel_error_mm", where), where + ".accel_error_mm");
    r.reproj_px = number(field(j, "reproj_px", where), where + ".reproj_px");
    r.per_frame_mpjpe_mm = number_list(field(j, "per_frame_mpjpe_mm", where), where + ".per_frame_mpjpe_mm");
    r.per_frame_accel_mm = number_list(field(j, "per_frame_accel_mm", where), where + ".per_frame_accel_mm");
    return r;
  });
}

std::string metric_table(const MetricReport& report) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(24) << "metric" << std::right << std::setw(14) << "value" << "\n";
  out << std::left << std::setw(24) << "mpjpe (mm)" << std::right << std::setw(14);
  if (report.mpjpe_mm) {
    out << *report.mpjpe_mm;
  } else {
    out << "n/a";
  }
  out << "\n";
  out << std::left << std::setw(24) << "accel error (mm/f^2)" << std::right << std::setw(14) << report.accel_error_mm
      << "\n";
  out << std::left << std::setw(24) << "reprojection (px)" << std::right << std::setw(14) << report.reproj_px << "\n";
  return out.str();
}

Json to_json(const LossReport& report) {
  Json entries = Json::array();
  for (const LossEntry& e : report.entries) {
    entries.push_back({{"iteration", e.iteration},
                       {"lr", e.lr},
                       {"total", loss_value(e.total)},
                       {"acce_pose", loss_value(e.acce_pose)},
                       {"acce_orients", loss_value(e.acce_orients)},
                       {"acce_position", loss_value(e.acce_position)},
                       {"loss_2d", loss_value(e.loss_2d)}});
  }
  return {{"version", kReportVersion},
          {"non_improving", report.non_improving},
          {"diverged", report.diverged},
          {"entries", entries},
          {"initial_metrics", metrics_or_null(report.initial_metrics)},
          {"final_metrics", metrics_or_null(report.final_metrics)}};
}

LossReport loss_report_from_json(const Json& j) {
  const std::string where = "loss_report";
  return guarded(where, [&] {
    check_version(j, kReportVersion, where);
    LossReport r;
    r.non_improving = boolean(field(j, "non_improving", where), where + ".non_improving");
    r.diverged = boolean(field(j, "diverged", where), where + ".diverged");
    const Json& entries = field(j, "entries", where);
    if (!entries.is_array()) fail(where, "entries must be an array");
    for (const Json& e : entries) {
      const std::string w = where + ".entries";
      r.entries.push_back({integer(field(e, "iteration", w), w), number(field(e, "lr", w), w),
                           loss_value_from_json(field(e, "total", w), w),
                           loss_value_from_json(field(e, "acce_pose", w), w),
                           loss_value_from_json(field(e, "acce_orients", w), w),
                           loss_value_from_json(field(e, "acce_position", w), w),
                           loss_value_from_json(field(e, "loss_2d", w), w)});
    }
    r.initial_metrics = optional_metrics(j, "initial_metrics");
    r.final_metrics = optional_metrics(j, "final_metrics");
    return r;
  });
}

std::string loss_report_csv(const LossReport& report) {
  std::string out = "iteration,lr,total,acce_pose,acce_orients,acce_position,loss_2d\n";
  for (const LossEntry& e : report.entries) {
    out += std::to_string(e.iteration);
    for (double x : {e.lr, e.total, e.acce_pose, e.acce_orients, e.acce_position, e.loss_2d}) {
      out += ',';
      out += format_double(x);
    }
    out += '\n';
  }
  return out;
}

}  // namespace handsmooth::io
