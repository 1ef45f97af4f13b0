#pragma once

// JSON / CSV boundary. Every artifact carries a `version` string; readers
// reject unknown versions and malformed content with SchemaError. Doubles
// are written in shortest round-trip form, so load(save(x)) == x.

#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"

#include "handsmooth/camera.hpp"
#include "handsmooth/hand_model.hpp"
#include "handsmooth/metrics.hpp"
#include "handsmooth/objective.hpp"
#include "handsmooth/smoother.hpp"
#include "handsmooth/synth.hpp"

namespace handsmooth::io {

using Json = nlohmann::json;

inline constexpr const char* kModelVersion = "handsmooth.model/1";
inline constexpr const char* kSequenceVersion = "handsmooth.sequence/1";
inline constexpr const char* kMotionVersion = "handsmooth.motion/1";
inline constexpr const char* kNoiseVersion = "handsmooth.noise/1";
inline constexpr const char* kReportVersion = "handsmooth.loss_report/1";
inline constexpr const char* kMetricsVersion = "handsmooth.metrics/1";
inline constexpr const char* kBuiltinModel = "builtin:right_hand_v1";

struct SequenceFile {
  std::string version = kSequenceVersion;
  // Either kBuiltinModel, a model file path (relative to the sequence file),
  // or empty for an inline model.
  std::string model_ref = kBuiltinModel;
  HandSkeleton skeleton = HandSkeleton::right_hand();
  TrajectoryParams init;
  SequenceObservation observations;  // owns the rig
  std::optional<TrajectoryParams> ground_truth;

  int num_frames() const { return init.num_frames(); }
  const CameraRig& rig() const { return observations.rig; }

  // Cross-field consistency: frame counts, rig, skeleton.
  void validate() const;

  bool operator==(const SequenceFile&) const = default;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// Canonical text form used for every JSON artifact (2-space indent,
// trailing newline).
std::string dump(const Json& j);

Json to_json(const HandSkeleton& skeleton);
HandSkeleton skeleton_from_json(const Json& j);
HandSkeleton load_hand_model(const std::filesystem::path& path);

Json to_json(const CameraRig& rig);
CameraRig rig_from_json(const Json& j);

Json to_json(const TrajectoryParams& traj);
TrajectoryParams trajectory_from_json(const Json& j);

// Landmarks / visibility only; the rig is stored next to it.
Json observations_to_json(const SequenceObservation& obs);
SequenceObservation observations_from_json(const Json& j, int num_frames, CameraRig rig);

Json to_json(const SequenceFile& file);
SequenceFile sequence_from_json(const Json& j, const std::filesystem::path& base_dir = {});
SequenceFile load_sequence(const std::filesystem::path& path);
void save_sequence(const std::filesystem::path& path, const SequenceFile& file);

Json to_json(const MotionSpec& spec);
MotionSpec motion_spec_from_json(const Json& j);
Json to_json(const NoiseSpec& spec);
NoiseSpec noise_spec_from_json(const Json& j);

Json to_json(const MetricReport& report);
MetricReport metric_report_from_json(const Json& j);
// Fixed-width human-readable summary.
std::string metric_table(const MetricReport& report);

Json to_json(const LossReport& report);
LossReport loss_report_from_json(const Json& j);
// Header `iteration,lr,total,acce_pose,acce_orients,acce_position,loss_2d`.
std::string loss_report_csv(const LossReport& report);

// Shortest decimal string that parses back to the same double.
std::string format_double(double x);

}  // namespace handsmooth::io
