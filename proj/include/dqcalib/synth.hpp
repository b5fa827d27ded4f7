#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dqcalib/dq.hpp"
#include "dqcalib/handeye.hpp"
#include "dqcalib/interp.hpp"

namespace dqcalib {

struct NoiseSpec {
  enum class Mode { Relative, Absolute };
  double trans_sigma = 0.0;  // meters, per axis
  double rot_sigma = 0.0;    // radians, per axis of the rotation vector
  Mode mode = Mode::Relative;
};

struct FeatureSpec {
  std::string label = "curb";
  double spacing = 0.5;   // meters between curb points along the curve
  double lateral = 4.0;   // curb offset to the left of the base origin
  double height = -1.0;   // curb height relative to the base origin
  double range = 30.0;    // max sensor-to-point distance for an observation
  double sigma = 0.0;     // per-axis observation noise, meters
};

/// Ground-truth rig. Sensor "front" is the reference lidar; the extrinsic
/// maps rear-lidar coordinates into front-lidar coordinates.
struct RigSpec {
  Pose extrinsic_fr;
  Pose base_to_front;
  double rate_front = 10.0;  // Hz
  double rate_rear = 10.0;
  double phase_front = 0.0;  // seconds
  double phase_rear = 0.037;
  NoiseSpec noise;
  FeatureSpec features;
  std::uint64_t seed = 1;

  Pose base_to_rear() const { return base_to_front * extrinsic_fr; }
};

/// Bus-like default: front-right and rear-left corner lidars about 9.5 m
/// apart with a 160 degree relative heading.
RigSpec default_rig();

enum class TrajectoryKind { ConstantScrew, Figure8_3D, PlanarLoop, PiecewiseRandomScrew };
std::string_view to_string(TrajectoryKind k);
TrajectoryKind trajectory_kind_from_string(std::string_view s);

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::Figure8_3D;
  double duration = 60.0;  // seconds
  double scale = 20.0;     // meters; loop radius of the driven path
};

struct FeatureObservation {
  std::string sensor_id;
  double timestamp = 0.0;
  std::string label;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();  // sensor frame
};

struct FeatureTrack {
  std::string label;
  std::vector<Eigen::Vector3d> points;  // world frame, ordered along the curve
  std::vector<FeatureObservation> observations;
  // Index into `points` per observation; ground truth only.
  std::vector<std::size_t> point_index;
};

struct SynthOutput {
  Trajectory front;  // odometry frame of the front lidar, identity at its first sample
  Trajectory rear;
  Pose ground_truth;  // extrinsic_fr
  Trajectory base;    // world-frame base trajectory at the union of sensor timestamps
  FeatureTrack features;
};

/// Body motion is a constant twist between consecutive rear-lidar scans
/// (the constant-velocity model of scan de-skewing), so ScLERP of the rear
/// trajectory is exact and alignment error stays at machine precision.
/// Throws InvalidSpec on non-positive rates or duration and negative sigmas.
SynthOutput generate(const RigSpec& rig, const TrajectorySpec& traj);

struct ExtrinsicError {
  double translation = 0.0;  // meters
  double rotation = 0.0;     // radians, geodesic
};

ExtrinsicError extrinsic_error(const Pose& estimate, const Pose& truth);
ExtrinsicError ground_truth_report(const RigSpec& rig, const CalibrationResult& result);

/// SE(3) exponential of a twist given as a rotation vector and a linear
/// velocity integrated over unit time.
Pose se3_exp(const Eigen::Vector3d& omega, const Eigen::Vector3d& velocity);

}  // namespace dqcalib
