#pragma once

#include <array>
#include <cstdint>

#include "geo3d/camera.hpp"

namespace geo3d {

// Row-major 3x3 matrix, just enough linear algebra for box math.
struct Mat3 {
  double m[3][3];

  static Mat3 identity();
  Mat3 operator*(const Mat3& o) const;
  Point3D operator*(const Point3D& p) const;
  Mat3 transposed() const;
};

// Wraps an angle to (-pi, pi]. Idempotent: values already in range are
// returned bit-identically.
double canonical_angle(double a);

// Rotation from yaw/pitch/roll applied intrinsically about Z, then Y, then X:
// R = Rz(yaw) * Ry(pitch) * Rx(roll).
Mat3 rotation_zyx(double yaw, double pitch, double roll);

// Inverse of rotation_zyx; pitch is returned in [-pi/2, pi/2].
void euler_from_rotation(const Mat3& r, double& yaw, double& pitch,
                         double& roll);

// Axis-aligned pixel rectangle. Bounds are inclusive geometrically; pixel
// iteration treats them as half-open so u_max/v_max may equal the image size.
struct Box2D {
  int u_min = 0;
  int v_min = 0;
  int u_max = 0;
  int v_max = 0;

  void validate() const;
  double area() const;
};

std::pair<double, double> box2d_center(const Box2D& b);

// Axis-aligned rectangle IoU; 0 when the union is empty.
double iou_2d(const Box2D& a, const Box2D& b);

// Oriented box: center in the camera frame, extents (l, w, h) along the local
// x/y/z axes, orientation as yaw/pitch/roll fed to rotation_zyx. Extents must
// be positive; angles are canonicalized to (-pi, pi] at construction.
class Box3D {
 public:
  Box3D(const Point3D& center, double l, double w, double h, double yaw,
        double pitch, double roll);

  static Box3D from_array(const std::array<double, 9>& v);
  std::array<double, 9> as_array() const;

  const Point3D& center() const { return center_; }
  double length() const { return l_; }
  double width() const { return w_; }
  double height() const { return h_; }
  double yaw() const { return yaw_; }
  double pitch() const { return pitch_; }
  double roll() const { return roll_; }

  double volume() const { return l_ * w_ * h_; }
  Mat3 rotation() const;

  // Eight corners in a Gray-code sign order over (x, y, z):
  // (---), (+--), (++-), (-+-), (-++), (+++), (+-+), (--+),
  // so consecutive corners differ along exactly one axis.
  std::array<Point3D, 8> corners() const;

  bool contains(const Point3D& p) const;

 private:
  Point3D center_;
  double l_, w_, h_;
  double yaw_, pitch_, roll_;
};

std::array<Point3D, 8> box3d_corners(const Box3D& b);

// Applies the same rigid motion (rotate by r, then translate by t) to a box.
Box3D transformed(const Box3D& b, const Mat3& r, const Point3D& t);

struct IoUResult {
  double iou = 0.0;
  double intersection_volume = 0.0;
  double union_volume = 0.0;
};

enum class IoUMode {
  full,      // all three orientation angles participate
  yaw_only,  // pitch and roll are zeroed before comparison
};

// Exact oriented-box IoU: box a's polytope is clipped by box b's six
// half-spaces and the remaining convex volume is measured. The operands are
// put in a canonical order first, so iou_3d(a, b) == iou_3d(b, a) bitwise.
IoUResult iou_3d(const Box3D& a, const Box3D& b, IoUMode mode = IoUMode::full);

// Monte-Carlo estimate by rejection sampling inside the common axis-aligned
// bound. Deterministic for a fixed seed; serves as the independent check on
// the exact clipping path.
IoUResult iou_3d_mc(const Box3D& a, const Box3D& b, std::uint64_t n_samples,
                    std::uint64_t seed, IoUMode mode = IoUMode::full);

}  // namespace geo3d
