#include "binpick/rotations.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "binpick/errors.hpp"

namespace binpick {

namespace {
constexpr double kSignTol = 1e-12;

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }
}  // namespace

Vec3 RotationMatrix::apply(const Vec3& v) const {
  return {m[0] * v.x + m[1] * v.y + m[2] * v.z,
          m[3] * v.x + m[4] * v.y + m[5] * v.z,
          m[6] * v.x + m[7] * v.y + m[8] * v.z};
}

RotationMatrix RotationMatrix::transposed() const {
  RotationMatrix t;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
  return t;
}

RotationMatrix RotationMatrix::operator*(const RotationMatrix& o) const {
  RotationMatrix out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += (*this)(r, k) * o(k, c);
      out(r, c) = s;
    }
  }
  return out;
}

double RotationMatrix::determinant() const {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) -
         m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

RotationMatrix RotationMatrix::checked(const std::array<double, 9>& values) {
  RotationMatrix r;
  r.m = values;
  const RotationMatrix gram = r.transposed() * r;
  double max_dev = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      max_dev = std::max(max_dev, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
  if (max_dev > 1e-6)
    throw NotARotation("matrix columns not orthonormal (deviation " +
                       std::to_string(max_dev) + ")");
  if (std::abs(r.determinant() - 1.0) > 1e-6)
    throw NotARotation("matrix determinant is not +1");
  return r;
}

void UnitQuaternion::renormalize() {
  const double n = std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_);
  w_ /= n;
  x_ /= n;
  y_ /= n;
  z_ /= n;
}

void UnitQuaternion::canonicalize() {
  double lead = w_;
  if (std::abs(w_) <= kSignTol) {
    if (std::abs(x_) > kSignTol)
      lead = x_;
    else if (std::abs(y_) > kSignTol)
      lead = y_;
    else
      lead = z_;
  }
  if (lead < 0.0) {
    w_ = -w_;
    x_ = -x_;
    y_ = -y_;
    z_ = -z_;
  }
}

UnitQuaternion UnitQuaternion::normalize(double w, double x, double y,
                                         double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > kSignTol)) throw ZeroNorm("cannot normalize a near-zero 4-vector");
  UnitQuaternion q(w / n, x / n, y / n, z / n);
  q.canonicalize();
  return q;
}

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3& axis,
                                               double angle) {
  const double n = axis.norm();
  if (!(n > kSignTol)) throw ZeroNorm("rotation axis has near-zero norm");
  const double half = 0.5 * angle;
  const double s = std::sin(half) / n;
  return normalize(std::cos(half), axis.x * s, axis.y * s, axis.z * s);
}

UnitQuaternion UnitQuaternion::operator*(const UnitQuaternion& r) const {
  UnitQuaternion q(w_ * r.w_ - x_ * r.x_ - y_ * r.y_ - z_ * r.z_,
                   w_ * r.x_ + x_ * r.w_ + y_ * r.z_ - z_ * r.y_,
                   w_ * r.y_ - x_ * r.z_ + y_ * r.w_ + z_ * r.x_,
                   w_ * r.z_ + x_ * r.y_ - y_ * r.x_ + z_ * r.w_);
  q.renormalize();
  q.canonicalize();
  return q;
}

UnitQuaternion UnitQuaternion::inverse() const {
  UnitQuaternion q(w_, -x_, -y_, -z_);
  q.canonicalize();
  return q;
}

Vec3 UnitQuaternion::rotate(const Vec3& v) const {
  const Vec3 im{x_, y_, z_};
  const Vec3 t = 2.0 * im.cross(v);
  return v + w_ * t + im.cross(t);
}

RotationMatrix UnitQuaternion::to_matrix() const {
  RotationMatrix r;
  const double xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
  const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
  const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
  r.m = {1 - 2 * (yy + zz), 2 * (xy - wz),     2 * (xz + wy),
         2 * (xy + wz),     1 - 2 * (xx + zz), 2 * (yz - wx),
         2 * (xz - wy),     2 * (yz + wx),     1 - 2 * (xx + yy)};
  return r;
}

UnitQuaternion UnitQuaternion::from_matrix(const RotationMatrix& input) {
  const RotationMatrix m = RotationMatrix::checked(input.m);
  // Shepperd's method: pick the largest of the four trace candidates.
  const double t = m(0, 0) + m(1, 1) + m(2, 2);
  double w, x, y, z;
  if (t > m(0, 0) && t > m(1, 1) && t > m(2, 2)) {
    const double s = std::sqrt(t + 1.0) * 2.0;
    w = 0.25 * s;
    x = (m(2, 1) - m(1, 2)) / s;
    y = (m(0, 2) - m(2, 0)) / s;
    z = (m(1, 0) - m(0, 1)) / s;
  } else if (m(0, 0) > m(1, 1) && m(0, 0) > m(2, 2)) {
    const double s = std::sqrt(1.0 + m(0, 0) - m(1, 1) - m(2, 2)) * 2.0;
    w = (m(2, 1) - m(1, 2)) / s;
    x = 0.25 * s;
    y = (m(0, 1) + m(1, 0)) / s;
    z = (m(0, 2) + m(2, 0)) / s;
  } else if (m(1, 1) > m(2, 2)) {
    const double s = std::sqrt(1.0 + m(1, 1) - m(0, 0) - m(2, 2)) * 2.0;
    w = (m(0, 2) - m(2, 0)) / s;
    x = (m(0, 1) + m(1, 0)) / s;
    y = 0.25 * s;
    z = (m(1, 2) + m(2, 1)) / s;
  } else {
    const double s = std::sqrt(1.0 + m(2, 2) - m(0, 0) - m(1, 1)) * 2.0;
    w = (m(1, 0) - m(0, 1)) / s;
    x = (m(0, 2) + m(2, 0)) / s;
    y = (m(1, 2) + m(2, 1)) / s;
    z = 0.25 * s;
  }
  return normalize(w, x, y, z);
}

UnitQuaternion UnitQuaternion::from_euler(const EulerAngles& e) {
  const UnitQuaternion qz = from_axis_angle({0, 0, 1}, e.yaw);
  const UnitQuaternion qy = from_axis_angle({0, 1, 0}, e.pitch);
  const UnitQuaternion qx = from_axis_angle({1, 0, 0}, e.roll);
  return qz * qy * qx;
}

EulerAngles UnitQuaternion::to_euler() const {
  const RotationMatrix m = to_matrix();
  EulerAngles e;
  const double sp = -m(2, 0);
  if (sp >= 1.0 - 1e-12) {
    // pitch = +pi/2; yaw and roll are coupled, fold everything into yaw.
    e.pitch = std::asin(1.0);
    e.roll = 0.0;
    e.yaw = std::atan2(-m(0, 1), m(1, 1));
  } else if (sp <= -1.0 + 1e-12) {
    e.pitch = std::asin(-1.0);
    e.roll = 0.0;
    e.yaw = std::atan2(-m(0, 1), m(1, 1));
  } else {
    e.pitch = std::asin(sp);
    e.yaw = std::atan2(m(1, 0), m(0, 0));
    e.roll = std::atan2(m(2, 1), m(2, 2));
  }
  return e;
}

UnitQuaternion UnitQuaternion::sample_uniform(Rng& rng) {
  for (;;) {
    const double w = rng.normal();
    const double x = rng.normal();
    const double y = rng.normal();
    const double z = rng.normal();
    if (w * w + x * x + y * y + z * z > 1e-24)
      return normalize(w, x, y, z);
  }
}

double UnitQuaternion::angle() const { return 2.0 * std::acos(clamp01(w_)); }

double geodesic_distance(const UnitQuaternion& a, const UnitQuaternion& b) {
  return 2.0 * std::acos(clamp01(std::abs(a.dot(b))));
}

double pose_loss(const UnitQuaternion& pred, const UnitQuaternion& gt,
                 double epsilon) {
  return std::log(1.0 - clamp01(std::abs(pred.dot(gt))) + epsilon);
}

std::string format_quaternion(const UnitQuaternion& q) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%.12g %.12g %.12g %.12g", q.w(), q.x(),
                q.y(), q.z());
  return buf;
}

UnitQuaternion parse_quaternion(const std::string& text) {
  std::istringstream in(text);
  double w, x, y, z;
  if (!(in >> w >> x >> y >> z))
    throw IoError("expected four decimals 'w x y z', got: " + text);
  return UnitQuaternion::normalize(w, x, y, z);
}

}  // namespace binpick
