#include "dqcalib/interp.hpp"

#include <algorithm>
#include <cmath>

#include "dqcalib/errors.hpp"

namespace dqcalib {

namespace {

// Pose files carry 9 decimals, which leaves |q|^2 up to ~4e-9 away from 1.
constexpr double kTrajectoryUnitTol = 1e-8;

std::vector<double> grid_for(const Trajectory& src, double lo, double hi) {
  std::vector<double> out;
  for (const Pose& p : src.poses()) {
    if (p.timestamp >= lo && p.timestamp <= hi) out.push_back(p.timestamp);
  }
  return out;
}

std::size_t count_in(const Trajectory& t, double lo, double hi) {
  return static_cast<std::size_t>(std::count_if(t.poses().begin(), t.poses().end(), [&](const Pose& p) {
    return p.timestamp >= lo && p.timestamp <= hi;
  }));
}

}  // namespace

Trajectory::Trajectory(std::string sensor_id, std::vector<Pose> poses)
    : sensor_id_(std::move(sensor_id)), poses_(std::move(poses)) {
  for (std::size_t i = 0; i < poses_.size(); ++i) {
    if (!poses_[i].rotation.is_unit(kTrajectoryUnitTol)) {
      throw Error(ErrorCode::InvalidSpec, "trajectory '" + sensor_id_ + "': non-unit rotation at index " +
                                              std::to_string(i));
    }
    if (i > 0 && !(poses_[i].timestamp > poses_[i - 1].timestamp)) {
      throw Error(ErrorCode::InvalidSpec, "trajectory '" + sensor_id_ +
                                              "': timestamps not strictly increasing at index " + std::to_string(i));
    }
  }
}

std::vector<double> Trajectory::timestamps() const {
  std::vector<double> out;
  out.reserve(poses_.size());
  for (const Pose& p : poses_) out.push_back(p.timestamp);
  return out;
}

DualQuaternion dq_pow(const DualQuaternion& q, double n) {
  Screw s = screw_params(q);
  s.angle *= n;
  s.displacement *= n;
  return from_screw(s);
}

DualQuaternion sclerp(const DualQuaternion& q1, const DualQuaternion& q2, double n) {
  if (n == 0.0) return q1.canonical();
  if (n == 1.0) return q2.canonical();
  // canonical() on the relative motion picks the short arc
  const DualQuaternion rel = (q1.inverse() * q2).canonical();
  return (q1 * dq_pow(rel, n)).canonical();
}

Pose interpolate_at(const Trajectory& traj, double t) {
  if (traj.empty() || !(t >= traj.start_time() && t <= traj.end_time())) {
    throw Error(ErrorCode::OutOfRange, "t = " + std::to_string(t) + " outside trajectory '" + traj.sensor_id() + "'");
  }
  const auto& poses = traj.poses();
  const auto it =
      std::lower_bound(poses.begin(), poses.end(), t, [](const Pose& p, double v) { return p.timestamp < v; });
  if (it->timestamp == t) return *it;
  const Pose& hi = *it;
  const Pose& lo = *(it - 1);
  const double n = (t - lo.timestamp) / (hi.timestamp - lo.timestamp);
  return to_pose(sclerp(from_pose(lo), from_pose(hi), n), t);
}

AlignedPair align(const Trajectory& a, const Trajectory& b, GridPolicy grid) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::NoOverlap, "empty trajectory");
  const double lo = std::max(a.start_time(), b.start_time());
  const double hi = std::min(a.end_time(), b.end_time());
  if (!(lo <= hi) || count_in(a, lo, hi) < 2 || count_in(b, lo, hi) < 2) {
    throw Error(ErrorCode::NoOverlap, "trajectories '" + a.sensor_id() + "' and '" + b.sensor_id() +
                                          "' share fewer than two samples each in time");
  }

  AlignedPair out;
  switch (grid.kind) {
    case GridPolicy::Kind::SensorA: out.timestamps = grid_for(a, lo, hi); break;
    case GridPolicy::Kind::SensorB: out.timestamps = grid_for(b, lo, hi); break;
    case GridPolicy::Kind::Uniform: {
      if (!(grid.step > 0.0)) throw Error(ErrorCode::InvalidSpec, "uniform grid step must be positive");
      for (std::size_t k = 0;; ++k) {
        const double t = lo + static_cast<double>(k) * grid.step;
        if (t > hi) break;
        out.timestamps.push_back(t);
      }
      break;
    }
  }
  out.poses_a.reserve(out.timestamps.size());
  out.poses_b.reserve(out.timestamps.size());
  for (double t : out.timestamps) {
    out.poses_a.push_back(interpolate_at(a, t));
    out.poses_b.push_back(interpolate_at(b, t));
  }
  return out;
}

std::vector<ScalarMismatch> scalar_mismatch(const AlignedPair& pair) {
  std::vector<ScalarMismatch> out;
  for (std::size_t i = 1; i < pair.size(); ++i) {
    const DualQuaternion a = from_pose(pair.poses_a[i - 1].inverse() * pair.poses_a[i]);
    const DualQuaternion b = from_pose(pair.poses_b[i - 1].inverse() * pair.poses_b[i]);
    out.push_back({std::abs(a.real.w - b.real.w), std::abs(a.dual.w - b.dual.w)});
  }
  return out;
}

}  // namespace dqcalib
