#include "geo3d/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "geo3d/rng.hpp"

namespace geo3d {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

Point3D add(const Point3D& a, const Point3D& b) {
  return {a.x + b.x, a.y + b.y, a.z + b.z};
}
Point3D sub(const Point3D& a, const Point3D& b) {
  return {a.x - b.x, a.y - b.y, a.z - b.z};
}
Point3D scale(const Point3D& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
double dot(const Point3D& a, const Point3D& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}
Point3D cross(const Point3D& a, const Point3D& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
double norm(const Point3D& a) { return std::sqrt(dot(a, a)); }

}  // namespace

Mat3 Mat3::identity() {
  return Mat3{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
}

Mat3 Mat3::operator*(const Mat3& o) const {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
      r.m[i][j] = s;
    }
  return r;
}

Point3D Mat3::operator*(const Point3D& p) const {
  return {m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z,
          m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z,
          m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z};
}

Mat3 Mat3::transposed() const {
  Mat3 r{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) r.m[i][j] = m[j][i];
  return r;
}

double canonical_angle(double a) {
  if (a > -kPi && a <= kPi) return a;  // keep in-range values bit-identical
  double r = std::remainder(a, 2.0 * kPi);  // lands in [-pi, pi]
  if (r <= -kPi) r = kPi;
  return r;
}

Mat3 rotation_zyx(double yaw, double pitch, double roll) {
  const double cz = std::cos(yaw), sz = std::sin(yaw);
  const double cy = std::cos(pitch), sy = std::sin(pitch);
  const double cx = std::cos(roll), sx = std::sin(roll);
  const Mat3 rz{{{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}}};
  const Mat3 ry{{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}}};
  const Mat3 rx{{{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}}};
  return rz * ry * rx;
}

void euler_from_rotation(const Mat3& r, double& yaw, double& pitch,
                         double& roll) {
  const double sy = -r.m[2][0];
  if (sy >= 1.0 - 1e-12) {
    // Gimbal lock looking "up": only yaw - roll is determined; pin roll = 0.
    pitch = kPi / 2.0;
    yaw = std::atan2(r.m[1][2], r.m[0][2]);
    roll = 0.0;
  } else if (sy <= -1.0 + 1e-12) {
    pitch = -kPi / 2.0;
    yaw = std::atan2(-r.m[1][2], -r.m[0][2]);
    roll = 0.0;
  } else {
    pitch = std::asin(sy);
    yaw = std::atan2(r.m[1][0], r.m[0][0]);
    roll = std::atan2(r.m[2][1], r.m[2][2]);
  }
}

void Box2D::validate() const {
  if (u_min > u_max)
    fail(ErrorKind::validation, "box2d: u_min " + std::to_string(u_min) +
                                    " > u_max " + std::to_string(u_max));
  if (v_min > v_max)
    fail(ErrorKind::validation, "box2d: v_min " + std::to_string(v_min) +
                                    " > v_max " + std::to_string(v_max));
}

double Box2D::area() const {
  return static_cast<double>(u_max - u_min) * static_cast<double>(v_max - v_min);
}

std::pair<double, double> box2d_center(const Box2D& b) {
  return {(b.u_min + b.u_max) / 2.0, (b.v_min + b.v_max) / 2.0};
}

double iou_2d(const Box2D& a, const Box2D& b) {
  a.validate();
  b.validate();
  const double iw = std::min(a.u_max, b.u_max) - std::max(a.u_min, b.u_min);
  const double ih = std::min(a.v_max, b.v_max) - std::max(a.v_min, b.v_min);
  const double inter = (iw > 0 && ih > 0) ? iw * ih : 0.0;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Box3D::Box3D(const Point3D& center, double l, double w, double h, double yaw,
             double pitch, double roll)
    : center_(center), l_(l), w_(w), h_(h) {
  if (!std::isfinite(center.x) || !std::isfinite(center.y) ||
      !std::isfinite(center.z))
    fail(ErrorKind::validation, "box3d: center must be finite");
  if (!(l > 0.0) || !(w > 0.0) || !(h > 0.0))
    fail(ErrorKind::validation, "box3d: extents must be positive, got (" +
                                    std::to_string(l) + ", " + std::to_string(w) +
                                    ", " + std::to_string(h) + ")");
  if (!std::isfinite(yaw) || !std::isfinite(pitch) || !std::isfinite(roll))
    fail(ErrorKind::validation, "box3d: angles must be finite");
  yaw_ = canonical_angle(yaw);
  pitch_ = canonical_angle(pitch);
  roll_ = canonical_angle(roll);
}

Box3D Box3D::from_array(const std::array<double, 9>& v) {
  return Box3D({v[0], v[1], v[2]}, v[3], v[4], v[5], v[6], v[7], v[8]);
}

std::array<double, 9> Box3D::as_array() const {
  return {center_.x, center_.y, center_.z, l_, w_, h_, yaw_, pitch_, roll_};
}

Mat3 Box3D::rotation() const { return rotation_zyx(yaw_, pitch_, roll_); }

std::array<Point3D, 8> Box3D::corners() const {
  const Mat3 r = rotation();
  const double hx = l_ / 2.0, hy = w_ / 2.0, hz = h_ / 2.0;
  std::array<Point3D, 8> out;
  for (int i = 0; i < 8; ++i) {
    const int g = i ^ (i >> 1);  // Gray code: neighbours differ in one axis
    const Point3D local{(g & 1) ? hx : -hx, (g & 2) ? hy : -hy,
                        (g & 4) ? hz : -hz};
    out[static_cast<std::size_t>(i)] = add(center_, r * local);
  }
  return out;
}

bool Box3D::contains(const Point3D& p) const {
  const Point3D d = rotation().transposed() * sub(p, center_);
  return std::abs(d.x) <= l_ / 2.0 && std::abs(d.y) <= w_ / 2.0 &&
         std::abs(d.z) <= h_ / 2.0;
}

std::array<Point3D, 8> box3d_corners(const Box3D& b) { return b.corners(); }

Box3D transformed(const Box3D& b, const Mat3& r, const Point3D& t) {
  double yaw, pitch, roll;
  euler_from_rotation(r * b.rotation(), yaw, pitch, roll);
  return Box3D(add(r * b.center(), t), b.length(), b.width(), b.height(), yaw,
               pitch, roll);
}

namespace {

// n . x <= d keeps a point inside.
struct HalfSpace {
  Point3D n;
  double d;
};

using Polygon = std::vector<Point3D>;

std::array<HalfSpace, 6> box_half_spaces(const Box3D& b) {
  const Mat3 r = b.rotation();
  const double half[3] = {b.length() / 2.0, b.width() / 2.0, b.height() / 2.0};
  std::array<HalfSpace, 6> out;
  for (int axis = 0; axis < 3; ++axis) {
    const Point3D n{r.m[0][axis], r.m[1][axis], r.m[2][axis]};
    const double c = dot(n, b.center());
    out[static_cast<std::size_t>(2 * axis)] = {n, c + half[axis]};
    out[static_cast<std::size_t>(2 * axis + 1)] = {scale(n, -1.0),
                                                   -c + half[axis]};
  }
  return out;
}

// Six quads wound counter-clockwise around their outward normals.
std::vector<Polygon> box_faces(const Box3D& b) {
  const auto c = b.corners();
  // Corner indices by Gray-code sign pattern: see Box3D::corners.
  static const int faces[6][4] = {
      {7, 4, 3, 0},  // -x
      {2, 5, 6, 1},  // +x
      {1, 6, 7, 0},  // -y
      {4, 5, 2, 3},  // +y
      {3, 2, 1, 0},  // -z
      {6, 5, 4, 7},  // +z
  };
  std::vector<Polygon> out;
  out.reserve(6);
  for (const auto& f : faces)
    out.push_back(
        {c[static_cast<std::size_t>(f[0])], c[static_cast<std::size_t>(f[1])],
         c[static_cast<std::size_t>(f[2])], c[static_cast<std::size_t>(f[3])]});
  return out;
}

// Sutherland-Hodgman against one half-space; crossing points are collected so
// the cut can be capped afterwards.
Polygon clip_polygon(const Polygon& poly, const HalfSpace& hs, double eps,
                     std::vector<Point3D>& cut_points) {
  Polygon out;
  const std::size_t n = poly.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point3D& a = poly[i];
    const Point3D& b = poly[(i + 1) % n];
    const double da = dot(hs.n, a) - hs.d;
    const double db = dot(hs.n, b) - hs.d;
    const bool ina = da <= eps;
    const bool inb = db <= eps;
    if (ina) out.push_back(a);
    if (ina != inb) {
      const double t = da / (da - db);
      const Point3D p = add(a, scale(sub(b, a), t));
      out.push_back(p);
      cut_points.push_back(p);
    }
  }
  return out;
}

void dedupe_points(std::vector<Point3D>& pts, double eps) {
  std::vector<Point3D> unique;
  for (const auto& p : pts) {
    bool seen = false;
    for (const auto& q : unique) {
      if (norm(sub(p, q)) <= eps) {
        seen = true;
        break;
      }
    }
    if (!seen) unique.push_back(p);
  }
  pts = std::move(unique);
}

// Clips a closed convex polyhedron by one half-space, rebuilding the cut face.
std::vector<Polygon> clip_polyhedron(const std::vector<Polygon>& faces,
                                     const HalfSpace& hs, double eps) {
  std::vector<Polygon> out;
  std::vector<Point3D> cut_points;
  for (const auto& face : faces) {
    Polygon clipped = clip_polygon(face, hs, eps, cut_points);
    if (clipped.size() >= 3) out.push_back(std::move(clipped));
  }
  dedupe_points(cut_points, 16.0 * eps);
  if (cut_points.size() >= 3) {
    // Order the ring counter-clockwise around hs.n so the cap faces outward.
    Point3D centroid{0, 0, 0};
    for (const auto& p : cut_points) centroid = add(centroid, p);
    centroid = scale(centroid, 1.0 / static_cast<double>(cut_points.size()));
    Point3D axis = std::abs(hs.n.x) < 0.9 ? Point3D{1, 0, 0} : Point3D{0, 1, 0};
    Point3D e1 = cross(axis, hs.n);
    e1 = scale(e1, 1.0 / norm(e1));
    const Point3D e2 = cross(hs.n, e1);
    std::vector<std::pair<double, Point3D>> ordered;
    ordered.reserve(cut_points.size());
    for (const auto& p : cut_points) {
      const Point3D d = sub(p, centroid);
      ordered.emplace_back(std::atan2(dot(d, e2), dot(d, e1)), p);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    Polygon cap;
    cap.reserve(ordered.size());
    for (const auto& [angle, p] : ordered) cap.push_back(p);
    out.push_back(std::move(cap));
  }
  return out;
}

// Divergence-theorem volume over outward-wound faces.
double polyhedron_volume(const std::vector<Polygon>& faces) {
  double six_v = 0.0;
  for (const auto& face : faces) {
    for (std::size_t i = 1; i + 1 < face.size(); ++i)
      six_v += dot(face[0], cross(face[i], face[i + 1]));
  }
  return std::abs(six_v) / 6.0;
}

double intersection_volume_exact(const Box3D& a, const Box3D& b) {
  // Tolerance scaled to the pair so face-touching boxes stay well-behaved.
  double scale_hint = 1.0;
  for (double v : {norm(a.center()), norm(b.center()), a.length(), a.width(),
                   a.height(), b.length(), b.width(), b.height()})
    scale_hint = std::max(scale_hint, v);
  const double eps = 1e-12 * scale_hint;

  std::vector<Polygon> poly = box_faces(a);
  for (const auto& hs : box_half_spaces(b)) {
    poly = clip_polyhedron(poly, hs, eps);
    if (poly.empty()) return 0.0;
  }
  return polyhedron_volume(poly);
}

Box3D flattened(const Box3D& b, IoUMode mode) {
  if (mode == IoUMode::full) return b;
  return Box3D(b.center(), b.length(), b.width(), b.height(), b.yaw(), 0.0,
               0.0);
}

bool box_less(const Box3D& a, const Box3D& b) {
  const auto va = a.as_array();
  const auto vb = b.as_array();
  return std::lexicographical_compare(va.begin(), va.end(), vb.begin(),
                                      vb.end());
}

}  // namespace

IoUResult iou_3d(const Box3D& a_in, const Box3D& b_in, IoUMode mode) {
  const Box3D a = flattened(a_in, mode);
  const Box3D b = flattened(b_in, mode);
  // Fixed operand order makes the float path identical under swap.
  const Box3D& first = box_less(b, a) ? b : a;
  const Box3D& second = box_less(b, a) ? a : b;

  double inter = intersection_volume_exact(first, second);
  inter = std::min(inter, std::min(first.volume(), second.volume()));
  const double uni = first.volume() + second.volume() - inter;
  IoUResult r;
  r.intersection_volume = inter;
  r.union_volume = uni;
  r.iou = uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
  return r;
}

IoUResult iou_3d_mc(const Box3D& a_in, const Box3D& b_in,
                    std::uint64_t n_samples, std::uint64_t seed, IoUMode mode) {
  if (n_samples < 1) fail(ErrorKind::domain, "n_samples must be >= 1");
  const Box3D a = flattened(a_in, mode);
  const Box3D b = flattened(b_in, mode);

  Point3D lo{1e300, 1e300, 1e300}, hi{-1e300, -1e300, -1e300};
  for (const Box3D* box : {&a, &b}) {
    for (const auto& c : box->corners()) {
      lo = {std::min(lo.x, c.x), std::min(lo.y, c.y), std::min(lo.z, c.z)};
      hi = {std::max(hi.x, c.x), std::max(hi.y, c.y), std::max(hi.z, c.z)};
    }
  }
  const double bound_vol =
      (hi.x - lo.x) * (hi.y - lo.y) * (hi.z - lo.z);

  const Mat3 rat = a.rotation().transposed();
  const Mat3 rbt = b.rotation().transposed();
  const Point3D ca = a.center(), cb = b.center();
  const double ha[3] = {a.length() / 2, a.width() / 2, a.height() / 2};
  const double hb[3] = {b.length() / 2, b.width() / 2, b.height() / 2};
  const auto inside = [](const Mat3& rt, const Point3D& c, const double h[3],
                         const Point3D& p) {
    const Point3D d = rt * Point3D{p.x - c.x, p.y - c.y, p.z - c.z};
    return std::abs(d.x) <= h[0] && std::abs(d.y) <= h[1] &&
           std::abs(d.z) <= h[2];
  };

  Rng rng(seed);
  std::uint64_t n_both = 0, n_either = 0;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    const Point3D p{rng.uniform(lo.x, hi.x), rng.uniform(lo.y, hi.y),
                    rng.uniform(lo.z, hi.z)};
    const bool in_a = inside(rat, ca, ha, p);
    const bool in_b = inside(rbt, cb, hb, p);
    if (in_a && in_b) ++n_both;
    if (in_a || in_b) ++n_either;
  }
  IoUResult r;
  const double inv = 1.0 / static_cast<double>(n_samples);
  r.intersection_volume = bound_vol * static_cast<double>(n_both) * inv;
  r.union_volume = bound_vol * static_cast<double>(n_either) * inv;
  r.iou = n_either > 0 ? static_cast<double>(n_both) /
                             static_cast<double>(n_either)
                       : 0.0;
  return r;
}

}  // namespace geo3d
