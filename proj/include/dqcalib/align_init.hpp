#pragma once

#include <vector>

#include <Eigen/Core>

#include "dqcalib/dq.hpp"
#include "dqcalib/interp.hpp"

namespace dqcalib {

/// Rigid least-squares fit b ~ R a + t.
struct RigidFit {
  Quaternion rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double rms_residual = 0.0;  // meters
  bool low_confidence = false;

  Pose pose() const { return {0.0, rotation, translation}; }
};

/// Closed-form rigid (scale fixed to 1, det R = +1) fit of points_b onto
/// points_a. Throws TooFewPoints below three pairs and DegenerateGeometry
/// when the points are collinear.
RigidFit umeyama_fit(const std::vector<Eigen::Vector3d>& points_a, const std::vector<Eigen::Vector3d>& points_b);

/// Fits sensor b's trajectory translations against sensor a's. This only
/// aligns trajectory shapes; a lever arm between the sensors shows up as
/// residual, not as translation. Fits with rms_residual above
/// `low_confidence_rms` are flagged.
RigidFit initial_extrinsic(const AlignedPair& pair, double low_confidence_rms = 0.5);

}  // namespace dqcalib
