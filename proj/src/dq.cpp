#include "dqcalib/dq.hpp"

#include <Eigen/Geometry>
#include <cmath>

#include "dqcalib/errors.hpp"

namespace dqcalib {

namespace {

Tolerances g_tolerances;

void require_unit(const DualQuaternion& q, const char* op) {
  if (!q.is_unit(g_tolerances.precondition)) {
    const DualScalar n = q.norm_sq();
    throw Error(ErrorCode::NonUnitDQ, std::string(op) + ": |q|^2 = (" + std::to_string(n.real) + ", " +
                                          std::to_string(n.dual) + ")");
  }
}

}  // namespace

const Tolerances& tolerances() { return g_tolerances; }
void set_tolerances(const Tolerances& tol) { g_tolerances = tol; }

// ---------------------------------------------------------------- Quaternion

Quaternion Quaternion::from_axis_angle(const Eigen::Vector3d& axis, double angle) {
  const Eigen::Vector3d n = axis.normalized();
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), s * n.x(), s * n.y(), s * n.z()};
}

Quaternion Quaternion::from_rotation_vector(const Eigen::Vector3d& rv) {
  const double angle = rv.norm();
  if (angle < 1e-12) {
    // second-order expansion keeps the result unit to machine precision
    return Quaternion{1.0, 0.5 * rv.x(), 0.5 * rv.y(), 0.5 * rv.z()}.normalized();
  }
  return from_axis_angle(rv / angle, angle);
}

Quaternion Quaternion::from_matrix(const Eigen::Matrix3d& rotation) {
  const Eigen::Quaterniond q(rotation);
  return Quaternion{q.w(), q.x(), q.y(), q.z()}.normalized();
}

double Quaternion::norm() const { return std::sqrt(squared_norm()); }

Quaternion Quaternion::normalized() const {
  const double n = norm();
  return {w / n, x / n, y / n, z / n};
}

bool Quaternion::is_unit(double tol) const { return std::abs(squared_norm() - 1.0) <= tol; }

Eigen::Matrix3d Quaternion::to_matrix() const {
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),   //
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Eigen::Vector3d Quaternion::rotate(const Eigen::Vector3d& v) const {
  const Eigen::Vector3d u = vec();
  const Eigen::Vector3d uv = 2.0 * u.cross(v);
  return v + w * uv + u.cross(uv);
}

double Quaternion::angle() const { return 2.0 * std::atan2(vec().norm(), std::abs(w)); }

Eigen::Vector3d Quaternion::log() const {
  const Quaternion c = canonical(*this);
  const double s = c.vec().norm();
  if (s < 1e-15) return 2.0 * c.vec();
  return (2.0 * std::atan2(s, c.w) / s) * c.vec();
}

Quaternion operator*(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,  //
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,  //
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,  //
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quaternion operator+(const Quaternion& a, const Quaternion& b) { return {a.w + b.w, a.x + b.x, a.y + b.y, a.z + b.z}; }
Quaternion operator-(const Quaternion& a, const Quaternion& b) { return {a.w - b.w, a.x - b.x, a.y - b.y, a.z - b.z}; }
Quaternion operator-(const Quaternion& q) { return {-q.w, -q.x, -q.y, -q.z}; }
Quaternion operator*(double s, const Quaternion& q) { return {s * q.w, s * q.x, s * q.y, s * q.z}; }
double dot(const Quaternion& a, const Quaternion& b) { return a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z; }

Quaternion canonical(const Quaternion& q) {
  for (double c : {q.w, q.x, q.y, q.z}) {
    if (c > 0.0) return q;
    if (c < 0.0) return -q;
  }
  return q;
}

// ------------------------------------------------------------ DualQuaternion

DualQuaternion DualQuaternion::from_vector(const Vector8d& v) {
  return {{v[0], v[1], v[2], v[3]}, {v[4], v[5], v[6], v[7]}};
}

Vector8d DualQuaternion::to_vector() const {
  Vector8d v;
  v << real.w, real.x, real.y, real.z, dual.w, dual.x, dual.y, dual.z;
  return v;
}

DualScalar DualQuaternion::norm_sq() const {
  // q q* = |r|^2 + eps (r d* + d r*) and r d* + d r* = 2 (r . d)
  return {real.squared_norm(), 2.0 * dot(real, dual)};
}

bool DualQuaternion::is_unit(double tol) const {
  const DualScalar n = norm_sq();
  return std::abs(n.real - 1.0) <= tol && std::abs(n.dual) <= tol;
}

DualQuaternion DualQuaternion::inverse() const {
  require_unit(*this, "inverse");
  return conjugate();
}

DualQuaternion DualQuaternion::canonical() const {
  const Quaternion c = dqcalib::canonical(real);
  if (c.w == real.w && c.x == real.x && c.y == real.y && c.z == real.z) return *this;
  return -*this;
}

DualQuaternion DualQuaternion::normalized() const {
  const double n = real.norm();
  const Quaternion r = (1.0 / n) * real;
  Quaternion d = (1.0 / n) * dual;
  d = d - dot(r, d) * r;
  return {r, d};
}

Eigen::Vector3d DualQuaternion::translation() const { return 2.0 * (dual * real.conjugate()).vec(); }

Eigen::Vector3d DualQuaternion::transform_point(const Eigen::Vector3d& p) const {
  return real.rotate(p) + translation();
}

DualQuaternion operator*(const DualQuaternion& a, const DualQuaternion& b) {
  return {a.real * b.real, a.real * b.dual + a.dual * b.real};
}

DualQuaternion operator+(const DualQuaternion& a, const DualQuaternion& b) {
  return {a.real + b.real, a.dual + b.dual};
}

DualQuaternion operator-(const DualQuaternion& q) { return {-q.real, -q.dual}; }
DualQuaternion operator*(double s, const DualQuaternion& q) { return {s * q.real, s * q.dual}; }

// ---------------------------------------------------------------------- Pose

Pose Pose::from_matrix(const Eigen::Matrix4d& m, double timestamp) {
  return {timestamp, Quaternion::from_matrix(m.topLeftCorner<3, 3>()), m.topRightCorner<3, 1>()};
}

Pose Pose::inverse() const {
  const Quaternion inv = rotation.conjugate();
  return {timestamp, inv, -inv.rotate(translation)};
}

Eigen::Matrix4d Pose::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation.to_matrix();
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Eigen::Vector3d Pose::transform_point(const Eigen::Vector3d& p) const { return rotation.rotate(p) + translation; }

Pose operator*(const Pose& a, const Pose& b) {
  return {b.timestamp, (a.rotation * b.rotation).normalized(), a.rotation.rotate(b.translation) + a.translation};
}

double rotation_angle(const Pose& p) { return p.rotation.angle(); }

// --------------------------------------------------------------- conversion

DualQuaternion from_pose(const Pose& pose) {
  const Quaternion r = pose.rotation;
  const Quaternion d = 0.5 * (Quaternion::pure(pose.translation) * r);
  return DualQuaternion{r, d}.canonical();
}

Pose to_pose(const DualQuaternion& q, double timestamp) {
  require_unit(q, "to_pose");
  const Quaternion r = canonical(q.real);
  return {timestamp, r, q.translation()};
}

// -------------------------------------------------------------------- screws

Screw screw_params(const DualQuaternion& q) {
  require_unit(q, "screw_params");
  const DualQuaternion c = q.canonical();
  const Eigen::Vector3d v = c.real.vec();
  const double s = v.norm();
  const double angle = 2.0 * std::atan2(s, c.real.w);

  Screw out;
  out.angle = angle;
  if (angle < g_tolerances.pure_translation_angle) {
    const Eigen::Vector3d t = c.translation();
    const double d = t.norm();
    out.pure_translation = true;
    out.displacement = d;
    // direction is arbitrary when nothing moves
    out.direction = d > 0.0 ? Eigen::Vector3d(t / d) : Eigen::Vector3d::UnitX();
    out.moment.setZero();
    return out;
  }
  const Eigen::Vector3d l = v / s;
  const double d = -2.0 * c.dual.w / s;
  out.direction = l;
  out.displacement = d;
  out.moment = (c.dual.vec() - 0.5 * d * c.real.w * l) / s;
  return out;
}

DualQuaternion from_screw(const Screw& s) {
  const double c = std::cos(0.5 * s.angle);
  const double sn = std::sin(0.5 * s.angle);
  const Eigen::Vector3d rv = sn * s.direction;
  const Eigen::Vector3d dv = sn * s.moment + 0.5 * s.displacement * c * s.direction;
  return {{c, rv.x(), rv.y(), rv.z()}, {-0.5 * s.displacement * sn, dv.x(), dv.y(), dv.z()}};
}

}  // namespace dqcalib
