#include "dqcalib/handeye.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "dqcalib/errors.hpp"

namespace dqcalib {

namespace {

// sigma_5 / sigma_1 below this means every pair shares one screw (rank 4).
constexpr double kCoaxialRatio = 1e-10;

Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return m;
}

double axis_angle_between(const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

Eigen::MatrixXd stack(const std::vector<MotionPair>& pairs, const std::vector<std::size_t>& idx) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(6 * idx.size()), 8);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    m.middleRows<6>(static_cast<Eigen::Index>(6 * i)) = build_s_matrix(pairs[idx[i]]);
  }
  return m;
}

struct Decomposition {
  Eigen::Matrix<double, 8, 1> singular;
  Eigen::Matrix<double, 8, 8> v;
};

Decomposition decompose(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinV);
  Decomposition d;
  d.singular.setZero();
  const Eigen::VectorXd s = svd.singularValues();
  d.singular.head(s.size()) = s;
  d.v.setZero();
  d.v.leftCols(svd.matrixV().cols()) = svd.matrixV();
  return d;
}

bool near_planar(const Decomposition& d, double threshold) {
  const double s5 = d.singular[4];
  const double s6 = d.singular[5];
  return s5 <= 0.0 || s6 / s5 < threshold;
}

// Unit, dual-orthogonal q = l1 v7 + l2 v8. The orthogonality constraint is
// the binary quadratic form l^T B l = 0; its two real root directions come
// from the eigenvectors of B, and the one with the larger l^T A l (norm of
// the real part) is kept, as in the ratio-of-lambdas formulation.
Vector8d combine_nullspace(const Vector8d& v7, const Vector8d& v8) {
  const Eigen::Vector4d u1 = v7.head<4>();
  const Eigen::Vector4d w1 = v7.tail<4>();
  const Eigen::Vector4d u2 = v8.head<4>();
  const Eigen::Vector4d w2 = v8.tail<4>();

  Eigen::Matrix2d b;
  b << u1.dot(w1), 0.5 * (u1.dot(w2) + u2.dot(w1)),  //
      0.5 * (u1.dot(w2) + u2.dot(w1)), u2.dot(w2);
  Eigen::Matrix2d a;
  a << u1.dot(u1), u1.dot(u2),  //
      u1.dot(u2), u2.dot(u2);

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(b);
  double e_lo = eig.eigenvalues()[0];
  double e_hi = eig.eigenvalues()[1];
  const double scale = std::max(std::abs(e_lo), std::abs(e_hi));
  if (e_lo > 0.0 && e_lo <= 1e-12 * scale) e_lo = 0.0;
  if (e_hi < 0.0 && -e_hi <= 1e-12 * scale) e_hi = 0.0;
  if (e_lo > 0.0 || e_hi < 0.0) {
    throw Error(ErrorCode::NumericalFailure, "orthogonality constraint has no real root in the nullspace");
  }
  const Eigen::Vector2d d_lo = eig.eigenvectors().col(0);
  const Eigen::Vector2d d_hi = eig.eigenvectors().col(1);

  double c = 0.0;
  double s = 1.0;
  if (e_hi > 0.0) {
    const double phi = std::atan(std::sqrt(-e_lo / e_hi));
    c = std::cos(phi);
    s = std::sin(phi);
  }
  const Eigen::Vector2d cand1 = c * d_lo + s * d_hi;
  const Eigen::Vector2d cand2 = c * d_lo - s * d_hi;
  const double n1 = cand1.dot(a * cand1);
  const double n2 = cand2.dot(a * cand2);
  const Eigen::Vector2d& best = n1 >= n2 ? cand1 : cand2;
  const double norm = std::max(n1, n2);
  if (!(norm > 0.0)) {
    throw Error(ErrorCode::NumericalFailure, "nullspace combination has a vanishing real part");
  }
  const Eigen::Vector2d lambda = best / std::sqrt(norm);
  return lambda[0] * v7 + lambda[1] * v8;
}

// Parallel screw axes: the nullspace is three dimensional but only one of
// its directions has a real part. Rotation comes from that direction; the
// dual part is the minimum-norm solution of the dual rows, which zeroes the
// unobservable translation along the common axis.
Vector8d solve_planar(const Eigen::MatrixXd& m, const Decomposition& d) {
  const Eigen::Matrix<double, 4, 3> u = d.v.block<4, 3>(0, 5);
  const Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> usvd(u, Eigen::ComputeFullU);
  const Eigen::Vector4d qr = usvd.matrixU().col(0).normalized();

  const Eigen::MatrixXd md = m.rightCols<4>();
  const Eigen::VectorXd rhs = -m.leftCols<4>() * qr;
  Eigen::JacobiSVD<Eigen::MatrixXd> dsvd(md, Eigen::ComputeThinU | Eigen::ComputeThinV);
  // Two null directions: q_r itself and the common axis times q_r.
  Eigen::Vector4d qd = Eigen::Vector4d::Zero();
  for (int k = 0; k < 2; ++k) {
    const double sigma = dsvd.singularValues()[k];
    if (sigma <= 0.0) continue;
    qd += (dsvd.matrixU().col(k).dot(rhs) / sigma) * dsvd.matrixV().col(k);
  }
  Vector8d x;
  x << qr, qd;
  return x;
}

Vector8d to_unit(const Vector8d& x) { return DualQuaternion::from_vector(x).normalized().to_vector(); }

}  // namespace

MotionSet extract_motions(const AlignedPair& pair, const ExtractOptions& options, const std::optional<RigidFit>& init) {
  MotionSet out;
  const bool gate = init.has_value() && !init->low_confidence;
  // The fit maps a-positions onto b-positions, i.e. it estimates R_ab^T.
  const Quaternion r_ab = gate ? init->rotation.conjugate() : Quaternion::identity();

  const std::size_t k = std::max<std::size_t>(1, options.stride);
  for (std::size_t i = k; i < pair.size(); ++i) {
    ++out.intervals;
    const DualQuaternion a = from_pose(pair.poses_a[i - k].inverse() * pair.poses_a[i]);
    const DualQuaternion b = from_pose(pair.poses_b[i - k].inverse() * pair.poses_b[i]);
    const ScalarMismatch mm{std::abs(a.real.w - b.real.w), std::abs(a.dual.w - b.dual.w)};
    out.mismatch.push_back(mm);

    const double angle = std::min(a.real.angle(), b.real.angle());
    if (angle < options.min_angle) {
      ++out.rejected_small_angle;
      continue;
    }
    if (mm.real > options.congruence_tol || mm.dual > options.congruence_tol) {
      ++out.rejected_congruence;
      continue;
    }
    if (gate && angle >= options.gate_min_rotation) {
      const Eigen::Vector3d axis_a = a.real.vec().normalized();
      const Eigen::Vector3d axis_b = r_ab.rotate(b.real.vec().normalized());
      if (axis_angle_between(axis_a, axis_b) > options.gate_angle) {
        ++out.rejected_gate;
        continue;
      }
    }
    out.pairs.push_back({a, b, pair.timestamps[i - k], pair.timestamps[i], angle});
  }
  return out;
}

SMatrix build_s_matrix(const MotionPair& m) {
  const Eigen::Vector3d ar = m.a.real.vec();
  const Eigen::Vector3d br = m.b.real.vec();
  const Eigen::Vector3d ad = m.a.dual.vec();
  const Eigen::Vector3d bd = m.b.dual.vec();

  SMatrix s = SMatrix::Zero();
  s.block<3, 1>(0, 0) = ar - br;
  s.block<3, 3>(0, 1) = skew(ar + br);
  s.block<3, 1>(3, 0) = ad - bd;
  s.block<3, 3>(3, 1) = skew(ad + bd);
  s.block<3, 1>(3, 4) = ar - br;
  s.block<3, 3>(3, 5) = skew(ar + br);
  return s;
}

std::string_view to_string(Degeneracy d) {
  switch (d) {
    case Degeneracy::WellConditioned: return "WellConditioned";
    case Degeneracy::NearPlanar: return "NearPlanar";
    case Degeneracy::Insufficient: return "Insufficient";
  }
  return "Unknown";
}

CalibrationResult solve(const std::vector<MotionPair>& pairs, const SolveOptions& options,
                        const std::optional<RigidFit>& init) {
  if (pairs.size() < 2) {
    throw Error(ErrorCode::InsufficientMotion, "need at least 2 motion pairs, got " + std::to_string(pairs.size()));
  }
  const std::size_t n = pairs.size();
  std::vector<std::size_t> all(n);
  for (std::size_t i = 0; i < n; ++i) all[i] = i;
  const Eigen::MatrixXd m = stack(pairs, all);
  const Decomposition whole = decompose(m);
  if (!(whole.singular[4] > kCoaxialRatio * whole.singular[0])) {
    throw Error(ErrorCode::InsufficientMotion, "all motion pairs share one screw axis");
  }

  CalibrationResult result;
  for (int i = 0; i < 8; ++i) result.singular_values[static_cast<std::size_t>(i)] = whole.singular[i];
  result.pairs_used = n;
  result.degeneracy =
      near_planar(whole, options.degeneracy_threshold) ? Degeneracy::NearPlanar : Degeneracy::WellConditioned;

  Vector8d x;
  if (result.degeneracy == Degeneracy::NearPlanar) {
    x = to_unit(solve_planar(m, whole));
    result.batches_used = 1;
  } else {
    // Interleaved batches: pair i goes to batch i mod nb, so each batch
    // samples the whole trajectory instead of one short stretch of it.
    const std::size_t b = options.batch_size == 0 ? n : std::min(options.batch_size, n);
    const std::size_t nb = std::max<std::size_t>(1, n / b);
    std::vector<std::vector<std::size_t>> batches(nb);
    for (std::size_t i = 0; i < n; ++i) batches[i % nb].push_back(i);

    std::vector<Vector8d> solutions;
    std::vector<double> sigma7;
    for (const auto& idx : batches) {
      if (batches.size() == 1) {
        solutions.push_back(to_unit(combine_nullspace(whole.v.col(6), whole.v.col(7))));
        sigma7.push_back(whole.singular[6]);
        break;
      }
      const Decomposition d = decompose(stack(pairs, idx));
      if (!(d.singular[4] > kCoaxialRatio * d.singular[0]) || near_planar(d, options.degeneracy_threshold)) continue;
      solutions.push_back(to_unit(combine_nullspace(d.v.col(6), d.v.col(7))));
      sigma7.push_back(d.singular[6]);
    }
    if (solutions.empty()) {
      solutions.push_back(to_unit(combine_nullspace(whole.v.col(6), whole.v.col(7))));
      sigma7.push_back(whole.singular[6]);
    }
    result.batches_used = solutions.size();

    const double s_min = *std::min_element(sigma7.begin(), sigma7.end());
    Vector8d sum = Vector8d::Zero();
    for (std::size_t k = 0; k < solutions.size(); ++k) {
      double w = 0.0;
      if (s_min > 0.0) {
        w = (s_min / sigma7[k]) * (s_min / sigma7[k]);
      } else {
        w = sigma7[k] == 0.0 ? 1.0 : 0.0;
      }
      const double sign = solutions[k].head<4>().dot(solutions.front().head<4>()) < 0.0 ? -1.0 : 1.0;
      sum += w * sign * solutions[k];
    }
    x = to_unit(sum);
  }

  DualQuaternion q = DualQuaternion::from_vector(x);
  if (init.has_value()) {
    const Quaternion r_ab = init->rotation.conjugate();
    if (dot(q.real, r_ab) < 0.0) q = -q;
  } else {
    q = q.canonical();
  }
  result.extrinsic = q;
  result.pose = to_pose(q);

  const Vector8d xv = q.to_vector();
  double total = 0.0;
  for (const MotionPair& p : pairs) total += (build_s_matrix(p) * xv).norm();
  result.mean_residual = total / static_cast<double>(n);
  return result;
}

Pose express_in_base(const Pose& extrinsic_fr, const Pose& base_to_front) {
  Pose out = base_to_front * extrinsic_fr;
  out.timestamp = extrinsic_fr.timestamp;
  return out;
}

}  // namespace dqcalib
