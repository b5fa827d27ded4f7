#pragma once

#include <string>
#include <vector>

#include "dqcalib/dq.hpp"

namespace dqcalib {

/// Time-ordered poses of one sensor in its own odometry frame.
class Trajectory {
 public:
  Trajectory() = default;
  /// Throws InvalidSpec on non-increasing timestamps or non-unit rotations.
  Trajectory(std::string sensor_id, std::vector<Pose> poses);

  const std::string& sensor_id() const { return sensor_id_; }
  const std::vector<Pose>& poses() const { return poses_; }
  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }
  const Pose& operator[](std::size_t i) const { return poses_[i]; }
  double start_time() const { return poses_.front().timestamp; }
  double end_time() const { return poses_.back().timestamp; }
  std::vector<double> timestamps() const;

 private:
  std::string sensor_id_;
  std::vector<Pose> poses_;
};

/// Poses of two sensors sampled on one timestamp grid.
struct AlignedPair {
  std::vector<double> timestamps;
  std::vector<Pose> poses_a;
  std::vector<Pose> poses_b;

  std::size_t size() const { return timestamps.size(); }
};

/// q^n along the constant screw of q; q^0 = identity, q^1 = canonical(q).
DualQuaternion dq_pow(const DualQuaternion& q, double n);

/// Screw linear interpolation q1 (q1^-1 q2)^n on the short arc.
DualQuaternion sclerp(const DualQuaternion& q1, const DualQuaternion& q2, double n);

/// Pose at time t; exact sample when t hits one, ScLERP between neighbours
/// otherwise. Throws OutOfRange outside [start_time, end_time].
Pose interpolate_at(const Trajectory& traj, double t);

struct GridPolicy {
  enum class Kind { SensorA, SensorB, Uniform };
  Kind kind = Kind::SensorA;
  double step = 0.0;  // seconds, Uniform only

  static GridPolicy sensor_a() { return {Kind::SensorA, 0.0}; }
  static GridPolicy sensor_b() { return {Kind::SensorB, 0.0}; }
  static GridPolicy uniform(double step) { return {Kind::Uniform, step}; }
};

/// Resamples both trajectories on a common grid inside their time overlap.
/// Grid points outside the overlap are dropped, never extrapolated. Throws
/// NoOverlap unless each trajectory has at least two samples in the overlap.
AlignedPair align(const Trajectory& a, const Trajectory& b, GridPolicy grid = GridPolicy::sensor_a());

/// |a.real.w - b.real.w| and |a.dual.w - b.dual.w| of the canonical relative
/// motions per grid interval. Equal screws have equal scalar parts, so this
/// measures how well the time alignment preserved screw congruence.
struct ScalarMismatch {
  double real = 0.0;
  double dual = 0.0;
};
std::vector<ScalarMismatch> scalar_mismatch(const AlignedPair& pair);

}  // namespace dqcalib
