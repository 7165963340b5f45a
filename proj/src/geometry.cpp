#include "artkit/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace artkit {

Vec3 Vec3::normalized() const {
  const double n = norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw GeometryError("cannot normalize a zero-length vector");
  }
  return *this / n;
}

double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

UnitQuat::UnitQuat(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw GeometryError("quaternion has zero or non-finite norm");
  }
  w_ = w / n;
  x_ = x / n;
  y_ = y / n;
  z_ = z / n;
}

UnitQuat UnitQuat::from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 a = axis.normalized();
  const double h = 0.5 * angle;
  const double s = std::sin(h);
  return {std::cos(h), a.x * s, a.y * s, a.z * s};
}

UnitQuat UnitQuat::from_rpy(double roll, double pitch, double yaw) {
  const double cr = std::cos(0.5 * roll), sr = std::sin(0.5 * roll);
  const double cp = std::cos(0.5 * pitch), sp = std::sin(0.5 * pitch);
  const double cy = std::cos(0.5 * yaw), sy = std::sin(0.5 * yaw);
  // qz(yaw) * qy(pitch) * qx(roll)
  return {cy * cp * cr + sy * sp * sr,
          cy * cp * sr - sy * sp * cr,
          cy * sp * cr + sy * cp * sr,
          sy * cp * cr - cy * sp * sr};
}

UnitQuat UnitQuat::operator*(const UnitQuat& o) const {
  return {w_ * o.w_ - x_ * o.x_ - y_ * o.y_ - z_ * o.z_,
          w_ * o.x_ + x_ * o.w_ + y_ * o.z_ - z_ * o.y_,
          w_ * o.y_ - x_ * o.z_ + y_ * o.w_ + z_ * o.x_,
          w_ * o.z_ + x_ * o.y_ - y_ * o.x_ + z_ * o.w_};
}

UnitQuat UnitQuat::conjugate() const { return {w_, -x_, -y_, -z_}; }

Vec3 UnitQuat::rotate(const Vec3& v) const {
  // v' = v + 2w (u x v) + 2 u x (u x v)
  const Vec3 u{x_, y_, z_};
  const Vec3 t = u.cross(v) * 2.0;
  return v + t * w_ + u.cross(t);
}

std::array<double, 9> UnitQuat::to_matrix() const {
  const double w = w_, x = x_, y = y_, z = z_;
  return {1 - 2 * (y * y + z * z), 2 * (x * y - w * z),     2 * (x * z + w * y),
          2 * (x * y + w * z),     1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
          2 * (x * z - w * y),     2 * (y * z + w * x),     1 - 2 * (x * x + y * y)};
}

Vec3 UnitQuat::to_rpy() const {
  const auto r = to_matrix();
  const double cos_pitch = std::hypot(r[0], r[3]);
  const double pitch = std::atan2(-r[6], cos_pitch);
  if (cos_pitch > 1e-12) {
    return {std::atan2(r[7], r[8]), pitch, std::atan2(r[3], r[0])};
  }
  return {0.0, pitch, std::atan2(-r[1], r[4])};
}

double quat_geodesic(const UnitQuat& q_p, const UnitQuat& q_g) {
  // Same value as 2 acos(|q_p . q_g|), but acos loses about 1e-8 rad near
  // zero. Here |w| of the relative rotation is that dot product.
  const UnitQuat r = q_p.conjugate() * q_g;
  const double v = std::sqrt(r.x() * r.x() + r.y() * r.y() + r.z() * r.z());
  return 2.0 * std::atan2(v, std::abs(r.w()));
}

Pose Pose::inverse() const {
  const UnitQuat qi = orientation.inverse();
  return {-qi.rotate(position), qi};
}

Pose compose(const Pose& a, const Pose& b) {
  return {a.orientation.rotate(b.position) + a.position, a.orientation * b.orientation};
}

void Aabb::expand(const Vec3& p) {
  min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
  max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
}

void Aabb::expand(const Aabb& other) {
  expand(other.min);
  expand(other.max);
}

bool Aabb::contains(const Vec3& p, double tol) const {
  return p.x >= min.x - tol && p.y >= min.y - tol && p.z >= min.z - tol && p.x <= max.x + tol &&
         p.y <= max.y + tol && p.z <= max.z + tol;
}

bool Aabb::contains(const Aabb& other, double tol) const {
  return contains(other.min, tol) && contains(other.max, tol);
}

bool Aabb::overlaps(const Aabb& o) const {
  return min.x <= o.max.x && o.min.x <= max.x && min.y <= o.max.y && o.min.y <= max.y &&
         min.z <= o.max.z && o.min.z <= max.z;
}

void TriMesh::validate() const {
  const auto n = vertices.size();
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    for (auto idx : triangles[i]) {
      if (idx >= n) {
        throw GeometryError("triangle " + std::to_string(i) + " references vertex " +
                            std::to_string(idx) + " of " + std::to_string(n));
      }
    }
  }
}

double TriMesh::surface_area() const {
  double area = 0.0;
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    const auto [a, b, c] = triangle(i);
    area += 0.5 * (b - a).cross(c - a).norm();
  }
  return area;
}

TriMesh transformed(const TriMesh& mesh, const Pose& pose) {
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = pose.transform_point(v);
  return out;
}

TriMesh scaled(const TriMesh& mesh, const Vec3& scale) {
  TriMesh out = mesh;
  for (auto& v : out.vertices) v = v.cwise_mul(scale);
  return out;
}

TriMesh merged(const TriMesh& a, const TriMesh& b) {
  TriMesh out = a;
  const auto offset = static_cast<std::uint32_t>(a.vertices.size());
  out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
  for (const auto& t : b.triangles) out.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  return out;
}

TriMesh make_box(const Vec3& size, const Vec3& center) {
  const Vec3 h = size * 0.5;
  TriMesh m;
  for (int i = 0; i < 8; ++i) {
    m.vertices.push_back({center.x + ((i & 1) ? h.x : -h.x), center.y + ((i & 2) ? h.y : -h.y),
                          center.z + ((i & 4) ? h.z : -h.z)});
  }
  // Outward-facing, counter-clockwise.
  m.triangles = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                 {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  return m;
}

Aabb aabb_of(const TriMesh& mesh, const Pose& transform) {
  if (mesh.vertices.empty() || mesh.triangles.empty()) {
    throw GeometryError("bounds of an empty mesh");
  }
  Aabb box = Aabb::of_point(transform.transform_point(mesh.vertices.front()));
  for (const auto& v : mesh.vertices) box.expand(transform.transform_point(v));
  return box;
}

Vec3 surface_centroid(const TriMesh& mesh) {
  Vec3 sum;
  double area = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto [a, b, c] = mesh.triangle(i);
    const double ta = 0.5 * (b - a).cross(c - a).norm();
    sum += (a + b + c) * (ta / 3.0);
    area += ta;
  }
  if (!(area > 0.0)) throw GeometryError("centroid of a zero-area mesh");
  return sum / area;
}

PointCloud transformed(const PointCloud& cloud, const Pose& pose) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) out.points.push_back(pose.transform_point(p));
  return out;
}

std::uint64_t CounterRng::next_u64() {
  // splitmix64 finalizer applied to seed + counter * golden gamma
  std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double CounterRng::next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

PointCloud sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed) {
  if (mesh.empty()) throw GeometryError("cannot sample an empty mesh");
  if (n == 0) throw GeometryError("sample count must be positive");
  mesh.validate();

  std::vector<double> cdf;
  cdf.reserve(mesh.triangles.size());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto [a, b, c] = mesh.triangle(i);
    total += 0.5 * (b - a).cross(c - a).norm();
    cdf.push_back(total);
  }
  if (!(total > 0.0)) throw GeometryError("cannot sample a mesh with zero surface area");

  CounterRng rng(seed);
  PointCloud cloud;
  cloud.points.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double pick = rng.next_unit() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), pick);
    if (it == cdf.end()) --it;
    const auto [a, b, c] = mesh.triangle(static_cast<std::size_t>(it - cdf.begin()));
    const double s = std::sqrt(rng.next_unit());
    const double r = rng.next_unit();
    cloud.points.push_back(a * (1.0 - s) + b * (s * (1.0 - r)) + c * (s * r));
  }
  return cloud;
}

}  // namespace artkit
