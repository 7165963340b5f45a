#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace artkit {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr bool operator==(const Vec3&) const = default;

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  constexpr double squared_norm() const { return dot(*this); }
  // Throws on a zero vector.
  Vec3 normalized() const;
  constexpr Vec3 cwise_mul(const Vec3& o) const { return {x * o.x, y * o.y, z * o.z}; }
  bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

double distance(const Vec3& a, const Vec3& b);

/// Unit quaternion, scalar first (w, x, y, z). Rotations are active and
/// right-handed. Every constructor and product renormalizes, so the norm stays
/// within 1e-9 of one.
class UnitQuat {
 public:
  UnitQuat() = default;
  UnitQuat(double w, double x, double y, double z);

  static UnitQuat identity() { return {}; }
  static UnitQuat from_axis_angle(const Vec3& axis, double angle);
  /// URDF fixed-axis roll/pitch/yaw: R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static UnitQuat from_rpy(double roll, double pitch, double yaw);
  static UnitQuat from_rpy(const Vec3& rpy) { return from_rpy(rpy.x, rpy.y, rpy.z); }

  double w() const { return w_; }
  double x() const { return x_; }
  double y() const { return y_; }
  double z() const { return z_; }

  UnitQuat operator*(const UnitQuat& o) const;
  UnitQuat conjugate() const;
  UnitQuat inverse() const { return conjugate(); }
  Vec3 rotate(const Vec3& v) const;
  double dot(const UnitQuat& o) const { return w_ * o.w_ + x_ * o.x_ + y_ * o.y_ + z_ * o.z_; }
  /// Roll/pitch/yaw in the URDF convention. At gimbal lock roll is set to 0.
  Vec3 to_rpy() const;
  /// Row-major 3x3 rotation matrix.
  std::array<double, 9> to_matrix() const;

 private:
  double w_ = 1.0;
  double x_ = 0.0;
  double y_ = 0.0;
  double z_ = 0.0;
};

/// Smallest rotation angle between two orientations, 2 acos(|q_p . q_g|), in [0, pi].
double quat_geodesic(const UnitQuat& q_p, const UnitQuat& q_g);

struct Pose {
  Vec3 position;
  UnitQuat orientation;

  static Pose identity() { return {}; }
  static Pose translation(const Vec3& t) { return {t, UnitQuat::identity()}; }
  static Pose rotation(const UnitQuat& q) { return {Vec3{}, q}; }

  Vec3 transform_point(const Vec3& p) const { return orientation.rotate(p) + position; }
  Vec3 transform_vector(const Vec3& v) const { return orientation.rotate(v); }
  Pose inverse() const;
};

/// Pose of frame b expressed through frame a: first rotate/translate by b, then by a.
Pose compose(const Pose& a, const Pose& b);
inline Pose operator*(const Pose& a, const Pose& b) { return compose(a, b); }

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Aabb {
  Vec3 min;
  Vec3 max;

  static Aabb of_point(const Vec3& p) { return {p, p}; }
  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 extent() const { return max - min; }
  void expand(const Vec3& p);
  void expand(const Aabb& other);
  bool contains(const Vec3& p, double tol = 0.0) const;
  bool contains(const Aabb& other, double tol = 0.0) const;
  bool overlaps(const Aabb& other) const;
};

struct TriMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::optional<std::string> color_tag;

  bool empty() const { return triangles.empty(); }
  /// Throws GeometryError when an index is out of range.
  void validate() const;
  std::array<Vec3, 3> triangle(std::size_t i) const {
    const auto& t = triangles[i];
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
  }
  double surface_area() const;
};

TriMesh transformed(const TriMesh& mesh, const Pose& pose);
TriMesh scaled(const TriMesh& mesh, const Vec3& scale);
/// Appends b's geometry to a copy of a.
TriMesh merged(const TriMesh& a, const TriMesh& b);
/// Axis-aligned box centered at `center` with edge lengths `size`.
TriMesh make_box(const Vec3& size, const Vec3& center = {});

/// Tight bounds of all transformed vertices. Throws GeometryError on an empty mesh.
Aabb aabb_of(const TriMesh& mesh, const Pose& transform = Pose::identity());

/// Area-weighted centroid of the surface.
Vec3 surface_centroid(const TriMesh& mesh);

struct PointCloud {
  std::vector<Vec3> points;
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

PointCloud transformed(const PointCloud& cloud, const Pose& pose);

/// Counter-based generator: the i-th draw depends only on (seed, i), so sample
/// sequences are identical on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}
  std::uint64_t next_u64();
  /// Uniform in [0, 1).
  double next_unit();

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

/// `n` points sampled area-proportionally over the triangles and uniformly
/// (barycentric) within each triangle. Deterministic for a fixed seed.
PointCloud sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

}  // namespace artkit
