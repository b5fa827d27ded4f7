#pragma once

#include <Eigen/Core>

namespace dqcalib {

using Vector8d = Eigen::Matrix<double, 8, 1>;

// Numerical tolerances shared by the algebra. Preconditions (is this a unit
// dual quaternion?) are checked loosely, postconditions are tested tightly.
struct Tolerances {
  double precondition = 1e-6;
  double postcondition = 1e-9;
  // Screws with a smaller rotation angle (radians) are treated as pure translations.
  double pure_translation_angle = 1e-8;
};

const Tolerances& tolerances();
// Not synchronized; call before spawning workers.
void set_tolerances(const Tolerances& tol);

/// Hamilton quaternion w + xi + yj + zk.
struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  static Quaternion identity() { return {1.0, 0.0, 0.0, 0.0}; }
  static Quaternion zero() { return {0.0, 0.0, 0.0, 0.0}; }
  /// Pure quaternion (0, v).
  static Quaternion pure(const Eigen::Vector3d& v) { return {0.0, v.x(), v.y(), v.z()}; }
  static Quaternion from_axis_angle(const Eigen::Vector3d& axis, double angle);
  /// Rotation vector (axis scaled by angle in radians).
  static Quaternion from_rotation_vector(const Eigen::Vector3d& rv);
  static Quaternion from_matrix(const Eigen::Matrix3d& rotation);

  Eigen::Vector3d vec() const { return {x, y, z}; }
  /// Coefficients ordered (w, x, y, z).
  Eigen::Vector4d coeffs() const { return {w, x, y, z}; }

  Quaternion conjugate() const { return {w, -x, -y, -z}; }
  double squared_norm() const { return w * w + x * x + y * y + z * z; }
  double norm() const;
  Quaternion normalized() const;
  bool is_unit(double tol) const;

  Eigen::Matrix3d to_matrix() const;
  Eigen::Vector3d rotate(const Eigen::Vector3d& v) const;
  /// Rotation angle in [0, pi] of the unit quaternion (sign-independent).
  double angle() const;
  /// Rotation vector with angle in [0, pi].
  Eigen::Vector3d log() const;
};

Quaternion operator*(const Quaternion& a, const Quaternion& b);
Quaternion operator+(const Quaternion& a, const Quaternion& b);
Quaternion operator-(const Quaternion& a, const Quaternion& b);
Quaternion operator-(const Quaternion& q);
Quaternion operator*(double s, const Quaternion& q);
double dot(const Quaternion& a, const Quaternion& b);

/// Representative of {q, -q} with w > 0, ties broken by the first nonzero
/// vector component being positive.
Quaternion canonical(const Quaternion& q);

struct DualScalar {
  double real = 0.0;
  double dual = 0.0;
};

/// q = real + eps * dual, eps^2 = 0.
struct DualQuaternion {
  Quaternion real = Quaternion::identity();
  Quaternion dual = Quaternion::zero();

  static DualQuaternion identity() { return {}; }
  /// Stacked (real.w, real.x, real.y, real.z, dual.w, dual.x, dual.y, dual.z).
  static DualQuaternion from_vector(const Vector8d& v);
  Vector8d to_vector() const;

  DualQuaternion conjugate() const { return {real.conjugate(), dual.conjugate()}; }
  /// q * conjugate(q) collapsed to its scalar (real, dual) pair.
  DualScalar norm_sq() const;
  bool is_unit(double tol) const;
  /// Conjugate of a unit dual quaternion; throws NonUnitDQ otherwise.
  DualQuaternion inverse() const;
  DualQuaternion canonical() const;
  /// Nearest unit dual quaternion: scale by 1/|real|, then drop the part of
  /// dual parallel to real.
  DualQuaternion normalized() const;

  /// 2 * dual * conj(real); only meaningful for unit inputs.
  Eigen::Vector3d translation() const;
  Eigen::Vector3d transform_point(const Eigen::Vector3d& p) const;
};

DualQuaternion operator*(const DualQuaternion& a, const DualQuaternion& b);
DualQuaternion operator+(const DualQuaternion& a, const DualQuaternion& b);
DualQuaternion operator-(const DualQuaternion& q);
DualQuaternion operator*(double s, const DualQuaternion& q);

/// Timestamped rigid transform x -> R x + t.
struct Pose {
  double timestamp = 0.0;
  Quaternion rotation = Quaternion::identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static Pose identity(double timestamp = 0.0) { return {timestamp, Quaternion::identity(), Eigen::Vector3d::Zero()}; }
  static Pose from_matrix(const Eigen::Matrix4d& m, double timestamp = 0.0);

  Pose inverse() const;
  Eigen::Matrix4d matrix() const;
  Eigen::Vector3d transform_point(const Eigen::Vector3d& p) const;
};

// Composition a * b. The result carries b's timestamp, so that
// inverse(T(t_i)) * T(t_j) is stamped at t_j.
Pose operator*(const Pose& a, const Pose& b);

/// q(T) = q(R) + eps 1/2 q(t) q(R), sign-canonicalized.
DualQuaternion from_pose(const Pose& pose);
/// T(q) = [R(q_r), 2 q_d q_r*]; throws NonUnitDQ.
Pose to_pose(const DualQuaternion& q, double timestamp = 0.0);

/// Screw (Chasles) decomposition of a unit dual quaternion: rotation by
/// `angle` about the line (direction, moment) together with `displacement`
/// meters of translation along it.
struct Screw {
  double angle = 0.0;
  double displacement = 0.0;
  Eigen::Vector3d direction = Eigen::Vector3d::UnitX();
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();
  bool pure_translation = false;
};

/// Decomposes the canonical representative, so angle is in [0, pi]. For
/// angles below tolerances().pure_translation_angle the direction is the
/// normalized translation and the moment is zero.
Screw screw_params(const DualQuaternion& q);
DualQuaternion from_screw(const Screw& s);

/// Rotation angle (radians) and translation norm of a rigid transform.
double rotation_angle(const Pose& p);

}  // namespace dqcalib
