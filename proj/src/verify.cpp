#include "dqcalib/verify.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>

#include "dqcalib/errors.hpp"

namespace dqcalib {

namespace {

constexpr std::size_t kMinSignTestSegments = 5;
constexpr double kEndTol = 1e-9;

std::vector<const FeatureObservation*> in_window(const std::vector<FeatureObservation>& obs, double lo, double hi) {
  std::vector<const FeatureObservation*> out;
  for (const auto& o : obs) {
    if (o.timestamp >= lo && o.timestamp < hi) out.push_back(&o);
  }
  return out;
}

Eigen::Vector3d to_world(const Trajectory& base, const Pose& mount, const FeatureObservation& o) {
  return (interpolate_at(base, o.timestamp) * mount).transform_point(o.point);
}

// Single-linkage clusters of the reference points, each sorted along its own
// principal direction. Chains of one point carry no curve and are dropped.
std::vector<std::vector<Eigen::Vector3d>> curb_chains(const std::vector<Eigen::Vector3d>& pts, double link) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  const std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if ((pts[i] - pts[j]).norm() <= link) parent[find(i)] = find(j);
    }
  }
  std::map<std::size_t, std::vector<Eigen::Vector3d>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(pts[i]);

  std::vector<std::vector<Eigen::Vector3d>> chains;
  for (auto& [root, chain] : groups) {
    if (chain.size() < 2) continue;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (const auto& p : chain) mean += p;
    mean /= static_cast<double>(chain.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : chain) cov += (p - mean) * (p - mean).transpose();
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU);
    const Eigen::Vector3d dir = svd.matrixU().col(0);
    std::sort(chain.begin(), chain.end(),
              [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return a.dot(dir) < b.dot(dir); });
    chains.push_back(std::move(chain));
  }
  return chains;
}

}  // namespace

OffsetEstimate kinematic_offset(const Trajectory& base_traj, const std::vector<double>& anchors,
                                const Pose& base_to_front, const Pose& base_to_rear,
                                const std::vector<double>& candidate_times, double horizon) {
  std::vector<double> times;
  std::vector<Eigen::Vector3d> rear_pos;
  for (double t : candidate_times) {
    if (t < base_traj.start_time() || t > base_traj.end_time()) continue;
    times.push_back(t);
    rear_pos.push_back(interpolate_at(base_traj, t).transform_point(base_to_rear.translation));
  }

  OffsetEstimate est;
  for (double ti : anchors) {
    if (ti < base_traj.start_time() || ti > base_traj.end_time()) {
      ++est.failed_anchors;
      continue;
    }
    const Eigen::Vector3d front = interpolate_at(base_traj, ti).transform_point(base_to_front.translation);
    const auto first = std::upper_bound(times.begin(), times.end(), ti);
    const auto last = std::upper_bound(times.begin(), times.end(), ti + horizon);
    const auto lo = static_cast<std::size_t>(first - times.begin());
    const auto hi = static_cast<std::size_t>(last - times.begin());
    if (hi - lo < 3) {
      ++est.failed_anchors;
      continue;
    }
    std::size_t best = lo;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = lo; j < hi; ++j) {
      const double d = (rear_pos[j] - front).norm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    // A minimum on the window edge means the rear lidar never passed the
    // front lidar's position.
    if (best == lo || best + 1 == hi) {
      ++est.failed_anchors;
      continue;
    }
    est.anchors.push_back(ti);
    est.offsets.push_back(times[best] - ti);
    est.residuals.push_back(best_d);
  }
  if (est.anchors.empty()) {
    throw Error(ErrorCode::NoForwardMotion, "no anchor found the rear lidar passing the front lidar's position within " +
                                                std::to_string(horizon) + " s");
  }
  est.confidence = std::accumulate(est.residuals.begin(), est.residuals.end(), 0.0) /
                   static_cast<double>(est.residuals.size());
  return est;
}

PolylineMatch match_to_polyline(const std::vector<Eigen::Vector3d>& reference,
                                const std::vector<Eigen::Vector3d>& query, double gate, double link_distance) {
  const std::vector<std::vector<Eigen::Vector3d>> chains = curb_chains(reference, link_distance);
  PolylineMatch out;
  for (const auto& q : query) {
    double best = std::numeric_limits<double>::infinity();
    bool outside = true;
    for (const auto& chain : chains) {
      const std::size_t nseg = chain.size() - 1;
      for (std::size_t s = 0; s < nseg; ++s) {
        const Eigen::Vector3d a = chain[s];
        const Eigen::Vector3d ab = chain[s + 1] - a;
        const double len2 = ab.squaredNorm();
        const double u = len2 > 0.0 ? (q - a).dot(ab) / len2 : 0.0;
        const double d = (a + std::clamp(u, 0.0, 1.0) * ab - q).norm();
        if (d < best) {
          best = d;
          outside = (s == 0 && u < -kEndTol) || (s + 1 == nseg && u > 1.0 + kEndTol);
        }
      }
    }
    if (outside || best > gate) {
      ++out.unmatched;
    } else {
      ++out.matched;
      out.distances.push_back(best);
    }
  }
  return out;
}

AssociationResult associate_features(const std::vector<FeatureObservation>& front_obs,
                                     const std::vector<FeatureObservation>& rear_obs, const OffsetEstimate& offset,
                                     const Trajectory& base_traj, const Pose& base_to_front, const Pose& extrinsic,
                                     const VerifyOptions& options) {
  if (front_obs.empty() || rear_obs.empty()) {
    throw Error(ErrorCode::NoOverlapWindow, "no observations from one of the lidars");
  }
  const Pose base_to_rear = base_to_front * extrinsic;

  AssociationResult out;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < offset.anchors.size(); ++k) {
    const double t0 = offset.anchors[k];
    const double dt = offset.offsets[k];
    const auto front = in_window(front_obs, t0, t0 + options.segment_length);
    const auto rear = in_window(rear_obs, t0 + dt, t0 + dt + options.segment_length);
    if (front.size() < 2 || rear.empty()) continue;

    std::vector<Eigen::Vector3d> ref;
    std::vector<Eigen::Vector3d> qry;
    for (const auto* o : front) {
      if (o->timestamp >= base_traj.start_time() && o->timestamp <= base_traj.end_time()) {
        ref.push_back(to_world(base_traj, base_to_front, *o));
      }
    }
    for (const auto* o : rear) {
      if (o->timestamp >= base_traj.start_time() && o->timestamp <= base_traj.end_time()) {
        qry.push_back(to_world(base_traj, base_to_rear, *o));
      }
    }
    const PolylineMatch m = match_to_polyline(ref, qry, options.gating_distance, options.link_distance);
    out.available += qry.size();
    out.unmatched_count += m.unmatched;

    SegmentResidual seg;
    seg.anchor = t0;
    seg.offset = dt;
    seg.reference_points = ref.size();
    seg.matched = m.matched;
    double seg_sq = 0.0;
    for (double d : m.distances) seg_sq += d * d;
    seg.rmse = m.matched > 0 ? std::sqrt(seg_sq / static_cast<double>(m.matched)) : 0.0;
    sum_sq += seg_sq;
    out.matched_count += m.matched;
    out.segments.push_back(seg);
  }
  if (out.matched_count == 0) {
    throw Error(ErrorCode::NoOverlapWindow, "offset windows share no curb points between the lidars");
  }
  out.rmse = std::sqrt(sum_sq / static_cast<double>(out.matched_count));
  return out;
}

std::vector<double> segment_anchors(const std::vector<FeatureObservation>& front_obs, double segment_length) {
  std::vector<double> out;
  if (front_obs.empty()) return out;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& o : front_obs) {
    lo = std::min(lo, o.timestamp);
    hi = std::max(hi, o.timestamp);
  }
  for (std::size_t k = 0;; ++k) {
    const double t = lo + static_cast<double>(k) * segment_length;
    if (t > hi) break;
    out.push_back(t);
  }
  return out;
}

double sign_test_p_value(std::size_t k, std::size_t n) {
  // sum_{i=k}^{n} C(n, i) / 2^n, accumulated in log space
  double p = 0.0;
  for (std::size_t i = k; i <= n; ++i) {
    const double log_c = std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(i) + 1.0) -
                         std::lgamma(static_cast<double>(n - i) + 1.0);
    p += std::exp(log_c - static_cast<double>(n) * std::log(2.0));
  }
  return std::min(1.0, p);
}

FeatureMatchReport compare(const Pose& before, const Pose& after, const VerifyScene& scene,
                           const VerifyOptions& options) {
  std::vector<FeatureObservation> front;
  std::vector<FeatureObservation> rear;
  for (const auto& o : scene.observations) {
    if (o.sensor_id == "front") front.push_back(o);
    if (o.sensor_id == "rear") rear.push_back(o);
  }
  const std::vector<double> anchors = segment_anchors(front, options.segment_length);
  const std::vector<double> candidates = scene.base.timestamps();

  auto run = [&](const Pose& extrinsic, OffsetEstimate& offset) {
    offset = kinematic_offset(scene.base, anchors, scene.base_to_front, scene.base_to_front * extrinsic, candidates,
                              options.horizon);
    return associate_features(front, rear, offset, scene.base, scene.base_to_front, extrinsic, options);
  };

  FeatureMatchReport report;
  report.before = run(before, report.offset_before);
  report.after = run(after, report.offset_after);
  report.rmse_before = report.before.rmse;
  report.rmse_after = report.after.rmse;
  report.matched_count = report.after.matched_count;

  std::map<double, double> before_by_anchor;
  for (const auto& s : report.before.segments) {
    if (s.matched > 0) before_by_anchor[s.anchor] = s.rmse;
  }
  for (const auto& s : report.after.segments) {
    const auto it = before_by_anchor.find(s.anchor);
    if (s.matched == 0 || it == before_by_anchor.end()) continue;
    const double diff = it->second - s.rmse;
    if (diff == 0.0) continue;
    ++report.segments_compared;
    if (diff > 0.0) ++report.segments_improved;
  }
  report.low_power = report.segments_compared < kMinSignTestSegments;
  if (!report.low_power) report.p_value = sign_test_p_value(report.segments_improved, report.segments_compared);
  return report;
}

}  // namespace dqcalib
