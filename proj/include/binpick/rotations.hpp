#pragma once

#include <array>
#include <string>

#include "binpick/linalg.hpp"
#include "binpick/rng.hpp"

namespace binpick {

// Row-major 3x3 rotation matrix. Construction through checked() validates
// orthonormality and det = +1; values produced by UnitQuaternion::to_matrix
// satisfy the invariants by construction.
struct RotationMatrix {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double operator()(int row, int col) const { return m[row * 3 + col]; }
  double& operator()(int row, int col) { return m[row * 3 + col]; }

  Vec3 apply(const Vec3& v) const;
  RotationMatrix transposed() const;
  RotationMatrix operator*(const RotationMatrix& o) const;
  double determinant() const;

  // Throws NotARotation if the matrix is not orthonormal with det = +1
  // within 1e-6.
  static RotationMatrix checked(const std::array<double, 9>& values);
};

// Z-Y-X intrinsic convention: yaw about Z, then pitch about Y', then roll
// about X''. Conversions always return pitch in [-pi/2, pi/2].
struct EulerAngles {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

// Unit quaternion, w-first component order.
//
// Storage invariants, re-established after every operation:
//   * unit norm,
//   * canonical sign: w >= 0, and when |w| <= 1e-12 the first component of
//     (x, y, z) with magnitude above 1e-12 is positive.
// q and -q encode the same rotation; canonical sign fixes the stored
// representative. w = cos(theta/2) for rotation angle theta.
class UnitQuaternion {
 public:
  UnitQuaternion() = default;  // identity

  // Scales a raw 4-vector to unit norm and canonicalizes the sign.
  // Throws ZeroNorm when the input norm is <= 1e-12.
  static UnitQuaternion normalize(double w, double x, double y, double z);

  static UnitQuaternion identity() { return UnitQuaternion(); }
  static UnitQuaternion from_axis_angle(const Vec3& axis, double angle);
  // Throws NotARotation via RotationMatrix::checked on invalid input.
  static UnitQuaternion from_matrix(const RotationMatrix& m);
  static UnitQuaternion from_euler(const EulerAngles& e);
  // Haar-uniform rotation from four standard normals.
  static UnitQuaternion sample_uniform(Rng& rng);

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  // Hamilton product, renormalized and canonicalized.
  UnitQuaternion operator*(const UnitQuaternion& rhs) const;
  UnitQuaternion inverse() const;
  Vec3 rotate(const Vec3& v) const;
  RotationMatrix to_matrix() const;
  EulerAngles to_euler() const;

  // Rotation angle in [0, pi].
  double angle() const;

  // 4-vector inner product (sign depends on the stored representatives).
  double dot(const UnitQuaternion& o) const {
    return w_ * o.w_ + x_ * o.x_ + y_ * o.y_ + z_ * o.z_;
  }

 private:
  UnitQuaternion(double w, double x, double y, double z)
      : w_(w), x_(x), y_(y), z_(z) {}
  void renormalize();
  void canonicalize();

  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

// Angle of the relative rotation: 2*acos(|<a, b>|), in [0, pi]. The inner
// product magnitude is clamped to [0, 1] before acos so rounding never
// produces NaN.
double geodesic_distance(const UnitQuaternion& a, const UnitQuaternion& b);

// Optimization surrogate for the geodesic metric: log(1 - |<pred, gt>| + eps).
// Strictly monotone in the geodesic distance; never used for reporting.
double pose_loss(const UnitQuaternion& pred, const UnitQuaternion& gt,
                 double epsilon = 1e-6);

// Text form "w x y z", canonical sign, 12 significant digits.
std::string format_quaternion(const UnitQuaternion& q);
UnitQuaternion parse_quaternion(const std::string& text);  // IoError

}  // namespace binpick
