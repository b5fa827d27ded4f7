#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dqcalib/dq.hpp"
#include "dqcalib/interp.hpp"
#include "dqcalib/synth.hpp"

namespace dqcalib {

struct VerifyOptions {
  double gating_distance = 1.0;  // meters
  double segment_length = 2.0;   // seconds of front observations per curb segment
  double horizon = 30.0;         // seconds searched for the time offset
  double link_distance = 2.0;    // meters; front points closer than this belong to one curb chain
};

/// Observation delay between the two lidars, one estimate per anchor time.
struct OffsetEstimate {
  std::string method = "nearest_position";
  std::vector<double> anchors;    // seconds
  std::vector<double> offsets;    // seconds
  std::vector<double> residuals;  // meters, achieved minimum distance
  std::size_t failed_anchors = 0;
  double confidence = 0.0;        // mean residual, meters
};

/// For each anchor t_i, the delay t_j - t_i minimizing the distance between
/// the rear lidar at t_j and the front lidar at t_i, t_j ranging over
/// `candidate_times` in (t_i, t_i + horizon]. Anchors whose minimum sits on
/// the edge of the window are dropped; throws NoForwardMotion if none remain.
OffsetEstimate kinematic_offset(const Trajectory& base_traj, const std::vector<double>& anchors,
                                const Pose& base_to_front, const Pose& base_to_rear,
                                const std::vector<double>& candidate_times, double horizon = 30.0);

struct PolylineMatch {
  std::size_t matched = 0;
  std::size_t unmatched = 0;
  std::vector<double> distances;  // matched points only
};

/// Splits `reference` into chains of points linked within `link_distance`
/// (a window can hold more than one curb), orders each chain along its
/// principal direction and measures each query point against the nearest
/// piecewise-linear chain. Queries that project beyond the end of their
/// nearest chain, or lie farther than `gate`, stay unmatched.
PolylineMatch match_to_polyline(const std::vector<Eigen::Vector3d>& reference,
                                const std::vector<Eigen::Vector3d>& query, double gate, double link_distance = 2.0);

struct SegmentResidual {
  double anchor = 0.0;
  double offset = 0.0;
  std::size_t reference_points = 0;
  std::size_t matched = 0;
  double rmse = 0.0;
};

struct AssociationResult {
  double rmse = 0.0;
  std::size_t matched_count = 0;
  std::size_t unmatched_count = 0;
  std::size_t available = 0;  // rear observations inside some segment window
  std::vector<SegmentResidual> segments;
};

/// Places both lidars' observations in the world through the base
/// trajectory and the mounts base_to_front and base_to_front * extrinsic,
/// then matches each segment's rear points to the front curb polyline.
/// Throws NoOverlapWindow when nothing can be matched.
AssociationResult associate_features(const std::vector<FeatureObservation>& front_obs,
                                     const std::vector<FeatureObservation>& rear_obs, const OffsetEstimate& offset,
                                     const Trajectory& base_traj, const Pose& base_to_front, const Pose& extrinsic,
                                     const VerifyOptions& options = {});

struct VerifyScene {
  std::vector<FeatureObservation> observations;  // sensor ids "front" and "rear"
  Trajectory base;
  Pose base_to_front;
};

struct FeatureMatchReport {
  AssociationResult before;
  AssociationResult after;
  OffsetEstimate offset_before;
  OffsetEstimate offset_after;
  double rmse_before = 0.0;
  double rmse_after = 0.0;
  std::size_t matched_count = 0;       // under `after`
  std::size_t segments_compared = 0;   // segments with a nonzero difference
  std::size_t segments_improved = 0;   // rmse_after < rmse_before
  std::optional<double> p_value;       // one-sided sign test
  bool low_power = false;
};

/// Segment anchors start at the first front observation, one per
/// segment_length.
std::vector<double> segment_anchors(const std::vector<FeatureObservation>& front_obs, double segment_length);

/// P(X >= k) for X ~ Binomial(n, 1/2).
double sign_test_p_value(std::size_t k, std::size_t n);

/// Runs offset estimation and association under both extrinsics on the same
/// observations and compares per-segment RMSE with a paired sign test.
/// Fewer than five informative segments cannot reach p < 0.05 and are
/// reported as low power without a p-value.
FeatureMatchReport compare(const Pose& before, const Pose& after, const VerifyScene& scene,
                           const VerifyOptions& options = {});

}  // namespace dqcalib
