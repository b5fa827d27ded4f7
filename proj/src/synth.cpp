#include "dqcalib/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <random>

#include "dqcalib/errors.hpp"
#include "dqcalib/metrics.hpp"

namespace dqcalib {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Twist {
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();     // rad/s, body frame
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();  // m/s, body frame
};

// Velocity profile of the base, with per-seed amplitude and phase jitter.
class Profile {
 public:
  Profile(const TrajectorySpec& spec, std::mt19937_64& rng) : spec_(spec) {
    std::uniform_real_distribution<double> jitter(0.9, 1.1);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
    for (double& j : jitter_) j = jitter(rng);
    for (double& p : phase_) p = phase(rng);
    if (spec.kind == TrajectoryKind::PiecewiseRandomScrew) {
      std::normal_distribution<double> ang(0.0, 0.25);
      std::normal_distribution<double> lin(0.0, 0.5);
      const auto pieces = static_cast<std::size_t>(std::ceil(spec.duration / kPieceSeconds)) + 1;
      for (std::size_t i = 0; i < pieces; ++i) {
        Twist t;
        t.omega = {ang(rng), ang(rng), ang(rng)};
        t.velocity = {0.3 * spec.scale + lin(rng), lin(rng), 0.4 * lin(rng)};
        pieces_.push_back(t);
      }
    }
  }

  Twist at(double t) const {
    const double s = spec_.scale;
    const double dur = spec_.duration;
    Twist tw;
    switch (spec_.kind) {
      case TrajectoryKind::ConstantScrew:
        tw.omega = Eigen::Vector3d(0.02, 0.03, 2.0 * 2.0 * kPi / dur) * jitter_[0];
        tw.velocity = Eigen::Vector3d(tw.omega.z() * s, 0.0, 0.2);
        break;
      case TrajectoryKind::PlanarLoop: {
        // Flat ground, two loops; curvature and speed vary so consecutive
        // screws share a direction but not an axis.
        const double yaw = 2.0 * 2.0 * kPi / dur * jitter_[0];
        const double w = 2.0 * kPi * 3.0 / dur;
        tw.omega.z() = yaw * (1.0 + 0.6 * std::sin(w * t + phase_[0]));
        tw.velocity.x() = yaw * s * (1.0 + 0.3 * std::cos(2.0 * w * t + phase_[1]));
        break;
      }
      case TrajectoryKind::Figure8_3D: {
        // Two figure-eight cycles: the yaw rate flips sign every half cycle
        // and integrates to a full turn per lobe.
        const double period = dur / 2.0;
        const double yaw_amp = 2.0 * kPi * kPi / period * jitter_[0];
        const double w = 2.0 * kPi / period;
        tw.omega.z() = yaw_amp * std::sin(w * t);
        tw.omega.x() = 0.12 * jitter_[1] * std::sin(3.0 * w * t + phase_[0]);
        tw.omega.y() = 0.15 * jitter_[2] * std::cos(2.0 * w * t + phase_[1]);
        tw.velocity = Eigen::Vector3d(0.4 * s * jitter_[3], 0.0, 0.0);
        break;
      }
      case TrajectoryKind::PiecewiseRandomScrew: {
        const auto i = std::min(pieces_.size() - 1, static_cast<std::size_t>(std::max(0.0, t) / kPieceSeconds));
        tw = pieces_[i];
        break;
      }
    }
    return tw;
  }

 private:
  static constexpr double kPieceSeconds = 2.0;
  TrajectorySpec spec_;
  std::array<double, 4> jitter_{};
  std::array<double, 2> phase_{};
  std::vector<Twist> pieces_;
};

// World-frame base trajectory, piecewise constant twist between knots.
class BasePath {
 public:
  BasePath(std::vector<double> knots, const Profile& profile) : knots_(std::move(knots)) {
    poses_.push_back(Pose::identity(knots_.front()));
    for (std::size_t k = 0; k + 1 < knots_.size(); ++k) {
      twists_.push_back(profile.at(0.5 * (knots_[k] + knots_[k + 1])));
      poses_.push_back(at_knot_offset(k, knots_[k + 1] - knots_[k]));
    }
  }

  Pose at(double t) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    std::size_t k = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin()) - 1;
    if (k >= twists_.size()) k = twists_.size() - 1;
    Pose p = at_knot_offset(k, t - knots_[k]);
    p.timestamp = t;
    return p;
  }

 private:
  Pose at_knot_offset(std::size_t k, double dt) const {
    Pose p = poses_[k] * se3_exp(dt * twists_[k].omega, dt * twists_[k].velocity);
    p.timestamp = knots_[k] + dt;
    return p;
  }

  std::vector<double> knots_;
  std::vector<Twist> twists_;
  std::vector<Pose> poses_;
};

std::vector<double> sample_times(double rate, double phase, double duration) {
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double t = phase + static_cast<double>(k) / rate;
    if (t > duration) break;
    out.push_back(t);
  }
  return out;
}

Pose noise_pose(std::mt19937_64& rng, const NoiseSpec& noise) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Eigen::Vector3d rv;
  Eigen::Vector3d tv;
  for (int i = 0; i < 3; ++i) rv[i] = noise.rot_sigma * n01(rng);
  for (int i = 0; i < 3; ++i) tv[i] = noise.trans_sigma * n01(rng);
  return {0.0, Quaternion::from_rotation_vector(rv), tv};
}

Trajectory odometry(const std::string& id, const BasePath& path, const Pose& mount, const std::vector<double>& times,
                    const NoiseSpec& noise, std::mt19937_64& rng) {
  std::vector<Pose> truth;
  truth.reserve(times.size());
  for (double t : times) {
    Pose p = path.at(t) * mount;
    p.timestamp = t;
    truth.push_back(p);
  }
  const Pose origin_inv = truth.front().inverse();
  for (Pose& p : truth) {
    const double t = p.timestamp;
    p = origin_inv * p;
    p.timestamp = t;
  }

  const bool noisy = noise.trans_sigma > 0.0 || noise.rot_sigma > 0.0;
  if (!noisy) return Trajectory(id, std::move(truth));

  std::vector<Pose> out;
  out.reserve(truth.size());
  out.push_back(truth.front());
  for (std::size_t k = 1; k < truth.size(); ++k) {
    Pose p;
    if (noise.mode == NoiseSpec::Mode::Relative) {
      p = out.back() * (truth[k - 1].inverse() * truth[k]) * noise_pose(rng, noise);
    } else {
      p = truth[k] * noise_pose(rng, noise);
    }
    p.timestamp = truth[k].timestamp;
    out.push_back(p);
  }
  return Trajectory(id, std::move(out));
}

FeatureTrack make_features(const RigSpec& rig, const BasePath& path, double t0, double t1,
                           const std::vector<double>& front_times, const std::vector<double>& rear_times,
                           std::mt19937_64& rng) {
  const FeatureSpec& fs = rig.features;
  FeatureTrack track;
  track.label = fs.label;

  // Dense curb curve, resampled at fixed arc length.
  const Eigen::Vector3d offset(0.0, fs.lateral, fs.height);
  std::vector<Eigen::Vector3d> dense;
  for (double t = t0; t <= t1; t += 0.02) dense.push_back(path.at(t).transform_point(offset));
  double carried = 0.0;
  track.points.push_back(dense.front());
  for (std::size_t i = 1; i < dense.size(); ++i) {
    const Eigen::Vector3d seg = dense[i] - dense[i - 1];
    const double len = seg.norm();
    double pos = fs.spacing - carried;
    while (pos <= len) {
      track.points.push_back(dense[i - 1] + (pos / len) * seg);
      pos += fs.spacing;
    }
    carried = len - (pos - fs.spacing);
  }

  std::normal_distribution<double> n01(0.0, 1.0);
  auto observe = [&](const std::string& id, const Pose& mount, const std::vector<double>& times) {
    std::vector<bool> seen(track.points.size(), false);
    std::vector<double> prev_x(track.points.size(), 0.0);
    for (std::size_t k = 0; k < times.size(); ++k) {
      const Pose base_inv = path.at(times[k]).inverse();
      const Pose sensor_inv = (path.at(times[k]) * mount).inverse();
      for (std::size_t i = 0; i < track.points.size(); ++i) {
        // longitudinal position of the point relative to the sensor, base axes
        const double x = base_inv.transform_point(track.points[i]).x() - mount.translation.x();
        const bool crossed = k > 0 && prev_x[i] > 0.0 && x <= 0.0;
        prev_x[i] = x;
        if (seen[i] || !crossed) continue;
        Eigen::Vector3d p = sensor_inv.transform_point(track.points[i]);
        if (p.norm() > fs.range) continue;
        seen[i] = true;
        if (fs.sigma > 0.0) p += fs.sigma * Eigen::Vector3d(n01(rng), n01(rng), n01(rng));
        track.observations.push_back({id, times[k], fs.label, p});
        track.point_index.push_back(i);
      }
    }
  };
  observe("front", rig.base_to_front, front_times);
  observe("rear", rig.base_to_rear(), rear_times);
  return track;
}

void validate(const RigSpec& rig, const TrajectorySpec& traj) {
  if (!(rig.rate_front > 0.0) || !(rig.rate_rear > 0.0)) throw Error(ErrorCode::InvalidSpec, "rates must be > 0");
  if (!(traj.duration > 0.0)) throw Error(ErrorCode::InvalidSpec, "duration must be > 0");
  if (!(traj.scale > 0.0)) throw Error(ErrorCode::InvalidSpec, "scale must be > 0");
  if (rig.noise.trans_sigma < 0.0 || rig.noise.rot_sigma < 0.0 || rig.features.sigma < 0.0) {
    throw Error(ErrorCode::InvalidSpec, "noise sigmas must be >= 0");
  }
  if (!(rig.features.spacing > 0.0)) throw Error(ErrorCode::InvalidSpec, "feature spacing must be > 0");
  if (rig.phase_front < 0.0 || rig.phase_rear < 0.0) throw Error(ErrorCode::InvalidSpec, "phases must be >= 0");
  if (rig.phase_front >= traj.duration || rig.phase_rear >= traj.duration) {
    throw Error(ErrorCode::InvalidSpec, "phase offsets exceed the duration");
  }
}

}  // namespace

RigSpec default_rig() {
  RigSpec rig;
  const Eigen::Matrix3d r_bf =
      (Eigen::AngleAxisd(-40.0 * kDegree, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(4.0 * kDegree, Eigen::Vector3d::UnitY()))
          .toRotationMatrix();
  const Eigen::Matrix3d r_br =
      (Eigen::AngleAxisd(120.0 * kDegree, Eigen::Vector3d::UnitZ()) * Eigen::AngleAxisd(-3.0 * kDegree, Eigen::Vector3d::UnitX()))
          .toRotationMatrix();
  rig.base_to_front = {0.0, Quaternion::from_matrix(r_bf), Eigen::Vector3d(8.2, -1.25, 2.1)};
  const Pose base_to_rear{0.0, Quaternion::from_matrix(r_br), Eigen::Vector3d(-1.1, 1.3, 2.3)};
  rig.extrinsic_fr = rig.base_to_front.inverse() * base_to_rear;
  rig.extrinsic_fr.timestamp = 0.0;
  return rig;
}

std::string_view to_string(TrajectoryKind k) {
  switch (k) {
    case TrajectoryKind::ConstantScrew: return "constant_screw";
    case TrajectoryKind::Figure8_3D: return "figure8_3d";
    case TrajectoryKind::PlanarLoop: return "planar_loop";
    case TrajectoryKind::PiecewiseRandomScrew: return "piecewise_random_screw";
  }
  return "unknown";
}

TrajectoryKind trajectory_kind_from_string(std::string_view s) {
  for (auto k : {TrajectoryKind::ConstantScrew, TrajectoryKind::Figure8_3D, TrajectoryKind::PlanarLoop,
                 TrajectoryKind::PiecewiseRandomScrew}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown trajectory kind '" + std::string(s) + "'");
}

Pose se3_exp(const Eigen::Vector3d& omega, const Eigen::Vector3d& velocity) {
  const double theta = omega.norm();
  Eigen::Matrix3d w;
  w << 0.0, -omega.z(), omega.y(), omega.z(), 0.0, -omega.x(), -omega.y(), omega.x(), 0.0;
  Eigen::Matrix3d r = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d v = Eigen::Matrix3d::Identity();
  if (theta < 1e-6) {
    r += w + 0.5 * w * w;
    v += 0.5 * w + w * w / 6.0;
  } else {
    const double t2 = theta * theta;
    r = Eigen::AngleAxisd(theta, omega / theta).toRotationMatrix();
    v += (1.0 - std::cos(theta)) / t2 * w + (theta - std::sin(theta)) / (t2 * theta) * w * w;
  }
  return {0.0, Quaternion::from_matrix(r), v * velocity};
}

SynthOutput generate(const RigSpec& rig, const TrajectorySpec& traj) {
  validate(rig, traj);
  std::mt19937_64 rng(rig.seed);
  const Profile profile(traj, rng);

  const std::vector<double> front_times = sample_times(rig.rate_front, rig.phase_front, traj.duration);
  const std::vector<double> rear_times = sample_times(rig.rate_rear, rig.phase_rear, traj.duration);
  if (front_times.size() < 2 || rear_times.size() < 2) {
    throw Error(ErrorCode::InvalidSpec, "duration too short for two samples per sensor");
  }
  const double t0 = std::min(front_times.front(), rear_times.front());
  const double t1 = std::max(front_times.back(), rear_times.back());

  std::vector<double> knots;
  if (t0 < rear_times.front()) knots.push_back(t0);
  knots.insert(knots.end(), rear_times.begin(), rear_times.end());
  if (t1 > rear_times.back()) knots.push_back(t1);
  const BasePath path(knots, profile);

  SynthOutput out;
  out.ground_truth = rig.extrinsic_fr;
  std::mt19937_64 noise_rng(rig.seed ^ 0x9e3779b97f4a7c15ULL);
  out.front = odometry("front", path, rig.base_to_front, front_times, rig.noise, noise_rng);
  out.rear = odometry("rear", path, rig.base_to_rear(), rear_times, rig.noise, noise_rng);

  std::vector<double> all = front_times;
  all.insert(all.end(), rear_times.begin(), rear_times.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::vector<Pose> base;
  base.reserve(all.size());
  for (double t : all) base.push_back(path.at(t));
  out.base = Trajectory("base", std::move(base));

  std::mt19937_64 feature_rng(rig.seed ^ 0xc2b2ae3d27d4eb4fULL);
  out.features = make_features(rig, path, t0, t1, front_times, rear_times, feature_rng);
  return out;
}

ExtrinsicError extrinsic_error(const Pose& estimate, const Pose& truth) {
  return {(estimate.translation - truth.translation).norm(),
          geodesic_angle(truth.rotation.conjugate() * estimate.rotation)};
}

ExtrinsicError ground_truth_report(const RigSpec& rig, const CalibrationResult& result) {
  return extrinsic_error(result.pose, rig.extrinsic_fr);
}

}  // namespace dqcalib
