#include "dqcalib/align_init.hpp"

#include <Eigen/Geometry>
#include <Eigen/SVD>
#include <cmath>

#include "dqcalib/errors.hpp"

namespace dqcalib {

namespace {

// Ratio of second to first singular value of the centered cloud below which
// the points are treated as lying on a line.
constexpr double kCollinearRatio = 1e-9;

bool collinear(const Eigen::Matrix3Xd& pts) {
  const Eigen::Matrix3Xd centered = pts.colwise() - pts.rowwise().mean();
  const Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
  const Eigen::Vector3d s = svd.singularValues();
  return s[0] == 0.0 || s[1] <= kCollinearRatio * s[0];
}

}  // namespace

RigidFit umeyama_fit(const std::vector<Eigen::Vector3d>& points_a, const std::vector<Eigen::Vector3d>& points_b) {
  if (points_a.size() != points_b.size()) {
    throw Error(ErrorCode::InvalidSpec, "point sets differ in size");
  }
  if (points_a.size() < 3) {
    throw Error(ErrorCode::TooFewPoints, "need at least 3 point pairs, got " + std::to_string(points_a.size()));
  }
  const auto n = static_cast<Eigen::Index>(points_a.size());
  Eigen::Matrix3Xd src(3, n);
  Eigen::Matrix3Xd dst(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    src.col(i) = points_a[static_cast<std::size_t>(i)];
    dst.col(i) = points_b[static_cast<std::size_t>(i)];
  }
  if (collinear(src) || collinear(dst)) {
    throw Error(ErrorCode::DegenerateGeometry, "collinear points leave the rotation about their line unobservable");
  }

  const Eigen::Matrix4d t = Eigen::umeyama(src, dst, /*with_scaling=*/false);
  const Eigen::Matrix3d r = t.topLeftCorner<3, 3>();

  RigidFit fit;
  fit.rotation = canonical(Quaternion::from_matrix(r));
  fit.translation = t.topRightCorner<3, 1>();
  const Eigen::Matrix3Xd residual = (r * src).colwise() + fit.translation - dst;
  fit.rms_residual = std::sqrt(residual.colwise().squaredNorm().mean());
  return fit;
}

RigidFit initial_extrinsic(const AlignedPair& pair, double low_confidence_rms) {
  std::vector<Eigen::Vector3d> a;
  std::vector<Eigen::Vector3d> b;
  a.reserve(pair.size());
  b.reserve(pair.size());
  for (std::size_t i = 0; i < pair.size(); ++i) {
    a.push_back(pair.poses_a[i].translation);
    b.push_back(pair.poses_b[i].translation);
  }
  RigidFit fit = umeyama_fit(a, b);
  fit.low_confidence = fit.rms_residual > low_confidence_rms;
  return fit;
}

}  // namespace dqcalib
