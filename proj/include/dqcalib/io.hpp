#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dqcalib/dq.hpp"
#include "dqcalib/handeye.hpp"
#include "dqcalib/interp.hpp"
#include "dqcalib/synth.hpp"
#include "dqcalib/verify.hpp"

namespace dqcalib {

constexpr int kSchemaVersion = 1;

struct ParseWarning {
  std::size_t line = 0;
  std::string message;
};

// --- pose files: "timestamp tx ty tz qx qy qz qw", 9 decimals, '#' comments

std::string format_pose_line(const Pose& p);
void write_trajectory(std::ostream& out, const Trajectory& traj);
/// Quaternions further than 1e-8 from unit norm are normalized; a warning is
/// recorded when the norm is off by more than 1e-3. Throws ParseError naming
/// `source` and the line number.
Trajectory read_trajectory(std::istream& in, const std::string& sensor_id, const std::string& source,
                           std::vector<ParseWarning>* warnings = nullptr);
Trajectory load_trajectory(const std::filesystem::path& path, const std::string& sensor_id,
                           std::vector<ParseWarning>* warnings = nullptr);
void save_trajectory(const std::filesystem::path& path, const Trajectory& traj);

// --- feature files: "sensor_id timestamp label x y z", sensor frame

void write_features(std::ostream& out, const std::vector<FeatureObservation>& obs);
std::vector<FeatureObservation> read_features(std::istream& in, const std::string& source);
std::vector<FeatureObservation> load_features(const std::filesystem::path& path);
void save_features(const std::filesystem::path& path, const std::vector<FeatureObservation>& obs);

// --- JSON helpers; every float is rounded to 12 significant digits

double round_sig12(double v);
nlohmann::json pose_to_json(const Pose& p);
Pose pose_from_json(const nlohmann::json& j);
nlohmann::json dq_to_json(const DualQuaternion& q);
/// Reads the "extrinsic" pose from a calibration report or ground-truth file.
Pose load_extrinsic_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

// --- configuration: flat "key = value" text, '#' comments

struct PipelineConfig {
  // calibration
  GridPolicy grid = GridPolicy::sensor_a();
  double min_angle_deg = 0.5;
  double congruence_tol = 0.02;
  double gate_angle_deg = 30.0;
  std::size_t motion_stride = 1;
  std::size_t batch_size = 50;
  double degeneracy_threshold = 1e-3;
  double init_low_confidence_rms = 0.5;
  // verification
  double gating_distance = 1.0;
  double link_distance = 2.0;
  double segment_length = 2.0;
  double offset_horizon = 30.0;
  // rig and simulation
  Pose base_to_front = default_rig().base_to_front;
  Pose sim_extrinsic = default_rig().extrinsic_fr;
  TrajectoryKind sim_trajectory = TrajectoryKind::Figure8_3D;
  double sim_duration = 60.0;
  double sim_scale = 20.0;
  double rate_front = 10.0;
  double rate_rear = 10.0;
  double phase_front = 0.0;
  double phase_rear = 0.037;
  double trans_sigma = 0.0;
  double rot_sigma_deg = 0.0;
  NoiseSpec::Mode noise_mode = NoiseSpec::Mode::Relative;
  double feature_sigma = 0.0;
  std::uint64_t seed = 1;

  ExtractOptions extract_options() const;
  SolveOptions solve_options() const;
  VerifyOptions verify_options() const;
  RigSpec rig() const;
  TrajectorySpec trajectory() const;
};

/// Unknown keys and malformed values throw ConfigError with the line number.
PipelineConfig parse_config(std::istream& in, const std::string& source);
PipelineConfig load_config(const std::filesystem::path& path);
/// Every key with its current value; parse_config accepts the output.
std::string config_to_text(const PipelineConfig& cfg);

}  // namespace dqcalib
