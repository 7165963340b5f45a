// Independent reference implementations used to check the library. None of
// these call into artkit beyond plain data types.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "artkit/geometry.hpp"
#include "artkit/model.hpp"

namespace oracle {

using artkit::Vec3;

// ---- 4x4 homogeneous transforms ----

using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 identity() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

inline Mat4 mul(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline Mat4 translation(const Vec3& t) {
  Mat4 m = identity();
  m[0][3] = t.x;
  m[1][3] = t.y;
  m[2][3] = t.z;
  return m;
}

inline Mat4 rot_x(double a) {
  Mat4 m = identity();
  m[1][1] = std::cos(a); m[1][2] = -std::sin(a);
  m[2][1] = std::sin(a); m[2][2] = std::cos(a);
  return m;
}
inline Mat4 rot_y(double a) {
  Mat4 m = identity();
  m[0][0] = std::cos(a); m[0][2] = std::sin(a);
  m[2][0] = -std::sin(a); m[2][2] = std::cos(a);
  return m;
}
inline Mat4 rot_z(double a) {
  Mat4 m = identity();
  m[0][0] = std::cos(a); m[0][1] = -std::sin(a);
  m[1][0] = std::sin(a); m[1][1] = std::cos(a);
  return m;
}

// Rodrigues' formula.
inline Mat4 rot_axis(Vec3 k, double a) {
  const double n = std::sqrt(k.x * k.x + k.y * k.y + k.z * k.z);
  k = {k.x / n, k.y / n, k.z / n};
  const double c = std::cos(a), s = std::sin(a), t = 1.0 - c;
  Mat4 m = identity();
  m[0][0] = t * k.x * k.x + c;       m[0][1] = t * k.x * k.y - s * k.z; m[0][2] = t * k.x * k.z + s * k.y;
  m[1][0] = t * k.x * k.y + s * k.z; m[1][1] = t * k.y * k.y + c;       m[1][2] = t * k.y * k.z - s * k.x;
  m[2][0] = t * k.x * k.z - s * k.y; m[2][1] = t * k.y * k.z + s * k.x; m[2][2] = t * k.z * k.z + c;
  return m;
}

inline Mat4 from_xyz_rpy(const Vec3& xyz, const Vec3& rpy) {
  return mul(translation(xyz), mul(rot_z(rpy.z), mul(rot_y(rpy.y), rot_x(rpy.x))));
}

// Rotation matrix of a unit quaternion (w, x, y, z) followed by a translation.
inline Mat4 from_quat(double w, double x, double y, double z, const Vec3& t) {
  Mat4 m = translation(t);
  m[0][0] = 1 - 2 * (y * y + z * z);
  m[0][1] = 2 * (x * y - w * z);
  m[0][2] = 2 * (x * z + w * y);
  m[1][0] = 2 * (x * y + w * z);
  m[1][1] = 1 - 2 * (x * x + z * z);
  m[1][2] = 2 * (y * z - w * x);
  m[2][0] = 2 * (x * z - w * y);
  m[2][1] = 2 * (y * z + w * x);
  m[2][2] = 1 - 2 * (x * x + y * y);
  return m;
}

inline Vec3 apply(const Mat4& m, const Vec3& p) {
  return {m[0][0] * p.x + m[0][1] * p.y + m[0][2] * p.z + m[0][3],
          m[1][0] * p.x + m[1][1] * p.y + m[1][2] * p.z + m[1][3],
          m[2][0] * p.x + m[2][1] * p.y + m[2][2] * p.z + m[2][3]};
}

inline Vec3 apply_dir(const Mat4& m, const Vec3& v) {
  return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z, m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
          m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

// Joint origins given as xyz/rpy, the way a URDF file states them.
struct MatJoint {
  std::string parent, child;
  artkit::JointKind kind;
  Vec3 xyz, rpy, axis;
};

// Recursive matrix forward kinematics. Joints may arrive in any order.
inline std::map<std::string, Mat4> forward(const std::string& root, const std::vector<MatJoint>& joints,
                                           const std::map<std::string, double>& q) {
  std::map<std::string, Mat4> out{{root, identity()}};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& j : joints) {
      if (out.count(j.child) || !out.count(j.parent)) continue;
      Mat4 m = mul(out[j.parent], from_xyz_rpy(j.xyz, j.rpy));
      const double v = q.count(j.child) ? q.at(j.child) : 0.0;
      if (j.kind == artkit::JointKind::revolute) m = mul(m, rot_axis(j.axis, v));
      if (j.kind == artkit::JointKind::prismatic) {
        const double n = std::sqrt(j.axis.dot(j.axis));
        m = mul(m, translation(j.axis * (v / n)));
      }
      out[j.child] = m;
      grew = true;
    }
  }
  return out;
}

// ---- angles and lines by numeric search ----

// Angle in [0, pi] between two nonzero vectors, found by rotating `a` about
// a x b and bisecting on the sign of the remaining turn.
inline double angle_by_rotation(const Vec3& a, const Vec3& b) {
  const Vec3 ua = a / a.norm();
  const Vec3 ub = b / b.norm();
  Vec3 n = ua.cross(ub);
  if (n.norm() < 1e-15) return ua.dot(ub) > 0 ? 0.0 : M_PI;
  n = n / n.norm();
  auto remaining = [&](double t) {
    const Vec3 r = ua * std::cos(t) + n.cross(ua) * std::sin(t);
    return r.cross(ub).dot(n);  // sin(theta - t)
  };
  double lo = 0.0, hi = M_PI;
  for (int i = 0; i < 200 && hi - lo > 0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (remaining(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Angle between two undirected lines, in [0, pi/2].
inline double line_angle(const Vec3& a, const Vec3& b) {
  const double t = angle_by_rotation(a, b);
  return std::min(t, M_PI - t);
}

template <class F>
double golden_min(F f, double lo, double hi, int iters = 160) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters; ++i) {
    if (f1 <= f2) {
      hi = x2; x2 = x1; f2 = f1;
      x1 = hi - r * (hi - lo); f1 = f(x1);
    } else {
      lo = x1; x1 = x2; f1 = f2;
      x2 = lo + r * (hi - lo); f2 = f(x2);
    }
  }
  return std::min(f1, f2);
}

// Distance between the lines p + s*u and q + t*v, minimizing over s and t.
// The search box is centered on the foot points of the other line's anchor
// and widens as the lines approach parallel.
inline double line_distance(const Vec3& p, const Vec3& u, const Vec3& q, const Vec3& v) {
  const Vec3 uu = u / u.norm();
  const Vec3 vv = v / v.norm();
  const double span = 10.0 * ((p - q).norm() + 1.0) / std::max(uu.cross(vv).norm(), 1e-6);
  const double s0 = (q - p).dot(uu);
  const double t0 = (p - q).dot(vv);
  auto inner = [&](double s) {
    const Vec3 ps = p + uu * s;
    return golden_min([&](double t) { return (ps - (q + vv * t)).norm(); }, t0 - span, t0 + span);
  };
  return golden_min(inner, s0 - span, s0 + span);
}

inline double point_line_distance(const Vec3& x, const Vec3& p, const Vec3& u) {
  const Vec3 uu = u / u.norm();
  return golden_min([&](double s) { return (x - (p + uu * s)).norm(); }, (x - p).dot(uu) - 10, (x - p).dot(uu) + 10);
}

// ---- triangles ----

using Tri = std::array<Vec3, 3>;

inline double orient2d(double ax, double ay, double bx, double by, double cx, double cy) {
  return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

inline bool segments_meet_2d(const double* a, const double* b, const double* c, const double* d, double eps) {
  const double o1 = orient2d(a[0], a[1], b[0], b[1], c[0], c[1]);
  const double o2 = orient2d(a[0], a[1], b[0], b[1], d[0], d[1]);
  const double o3 = orient2d(c[0], c[1], d[0], d[1], a[0], a[1]);
  const double o4 = orient2d(c[0], c[1], d[0], d[1], b[0], b[1]);
  auto within = [&](const double* p, const double* q, const double* r) {
    return std::min(p[0], q[0]) - eps <= r[0] && r[0] <= std::max(p[0], q[0]) + eps &&
           std::min(p[1], q[1]) - eps <= r[1] && r[1] <= std::max(p[1], q[1]) + eps;
  };
  if (((o1 > eps && o2 < -eps) || (o1 < -eps && o2 > eps)) && ((o3 > eps && o4 < -eps) || (o3 < -eps && o4 > eps)))
    return true;
  if (std::abs(o1) <= eps && within(a, b, c)) return true;
  if (std::abs(o2) <= eps && within(a, b, d)) return true;
  if (std::abs(o3) <= eps && within(c, d, a)) return true;
  if (std::abs(o4) <= eps && within(c, d, b)) return true;
  return false;
}

inline bool point_in_tri_2d(const double* p, const double (*t)[2], double eps) {
  const double d1 = orient2d(t[0][0], t[0][1], t[1][0], t[1][1], p[0], p[1]);
  const double d2 = orient2d(t[1][0], t[1][1], t[2][0], t[2][1], p[0], p[1]);
  const double d3 = orient2d(t[2][0], t[2][1], t[0][0], t[0][1], p[0], p[1]);
  const bool neg = d1 < -eps || d2 < -eps || d3 < -eps;
  const bool pos = d1 > eps || d2 > eps || d3 > eps;
  return !(neg && pos);
}

// Closed-triangle intersection by edge/face piercing plus an explicit
// coplanar case. Touching counts. `eps` absorbs rounding in the predicates.
inline bool triangles_intersect(const Tri& a, const Tri& b, double eps = 1e-12) {
  auto normal = [](const Tri& t) { return (t[1] - t[0]).cross(t[2] - t[0]); };
  const Vec3 na = normal(a), nb = normal(b);
  auto side = [&](const Vec3& n, const Tri& t, const Vec3& p) { return n.dot(p - t[0]) / n.norm(); };
  const double db[3] = {side(na, a, b[0]), side(na, a, b[1]), side(na, a, b[2])};
  const double da[3] = {side(nb, b, a[0]), side(nb, b, a[1]), side(nb, b, a[2])};
  auto all_one_side = [&](const double* d) {
    return (d[0] > eps && d[1] > eps && d[2] > eps) || (d[0] < -eps && d[1] < -eps && d[2] < -eps);
  };
  if (all_one_side(db) || all_one_side(da)) return false;

  if (std::abs(db[0]) <= eps && std::abs(db[1]) <= eps && std::abs(db[2]) <= eps) {
    // Coplanar: drop the dominant normal axis and work in 2D.
    int drop = 0;
    if (std::abs(na.y) > std::abs(na[drop])) drop = 1;
    if (std::abs(na.z) > std::abs(na[drop])) drop = 2;
    const int i0 = drop == 0 ? 1 : 0, i1 = drop == 2 ? 1 : 2;
    double pa[3][2], pb[3][2];
    for (int k = 0; k < 3; ++k) {
      pa[k][0] = a[k][i0]; pa[k][1] = a[k][i1];
      pb[k][0] = b[k][i0]; pb[k][1] = b[k][i1];
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (segments_meet_2d(pa[i], pa[(i + 1) % 3], pb[j], pb[(j + 1) % 3], eps)) return true;
    return point_in_tri_2d(pa[0], pb, eps) || point_in_tri_2d(pb[0], pa, eps);
  }

  // An edge of one touches the other's closed face.
  auto edge_hits = [&](const Tri& edges, const Tri& face, const Vec3& n) {
    const double nn = n.norm();
    auto inside = [&](const Vec3& x) {
      const double s0 = (face[1] - face[0]).cross(x - face[0]).dot(n) / nn;
      const double s1 = (face[2] - face[1]).cross(x - face[1]).dot(n) / nn;
      const double s2 = (face[0] - face[2]).cross(x - face[2]).dot(n) / nn;
      return (s0 >= -eps && s1 >= -eps && s2 >= -eps) || (s0 <= eps && s1 <= eps && s2 <= eps);
    };
    for (int i = 0; i < 3; ++i) {
      const Vec3 p = edges[i], q = edges[(i + 1) % 3];
      const double sp = n.dot(p - face[0]) / nn, sq = n.dot(q - face[0]) / nn;
      if ((sp > eps && sq > eps) || (sp < -eps && sq < -eps)) continue;
      if (std::abs(sp - sq) <= eps) {
        // Edge lying in the face plane. Crossings of the face boundary show
        // up from the other triangle's edges; only containment is left.
        if (inside(p) || inside(q)) return true;
        continue;
      }
      const double t = std::clamp(sp / (sp - sq), 0.0, 1.0);
      if (inside(p + (q - p) * t)) return true;
    }
    return false;
  };
  return edge_hits(a, b, nb) || edge_hits(b, a, na);
}

inline std::vector<Tri> triangles_of(const artkit::TriMesh& m, const artkit::Pose& pose) {
  std::vector<Tri> out;
  for (std::size_t i = 0; i < m.triangles.size(); ++i) {
    auto t = m.triangle(i);
    out.push_back({pose.transform_point(t[0]), pose.transform_point(t[1]), pose.transform_point(t[2])});
  }
  return out;
}

// Every pair, no culling.
inline bool meshes_intersect(const std::vector<Tri>& a, const std::vector<Tri>& b) {
  for (const auto& x : a)
    for (const auto& y : b)
      if (oracle::triangles_intersect(x, y)) return true;
  return false;
}

// Interpenetration only: a negative tolerance makes every predicate strict, so
// faces that merely touch are not reported.
inline bool triangles_penetrate(const Tri& a, const Tri& b) { return triangles_intersect(a, b, -1e-12); }

inline bool meshes_penetrate(const std::vector<Tri>& a, const std::vector<Tri>& b) {
  for (const auto& x : a)
    for (const auto& y : b)
      if (triangles_penetrate(x, y)) return true;
  return false;
}

// ---- point clouds ----

inline double chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  auto one_way = [](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double sum = 0.0;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) best = std::min(best, (p - q).norm());
      sum += best;
    }
    return sum / static_cast<double>(from.size());
  };
  return 0.5 * (one_way(a, b) + one_way(b, a));
}

}  // namespace oracle
