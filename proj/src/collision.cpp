#include "artkit/collision.hpp"

#include <algorithm>
#include <vector>

namespace artkit {

namespace {

bool separated_on(const Vec3& axis, const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b) {
  const double a0 = axis.dot(a[0]), a1 = axis.dot(a[1]), a2 = axis.dot(a[2]);
  const double b0 = axis.dot(b[0]), b1 = axis.dot(b[1]), b2 = axis.dot(b[2]);
  const double amin = std::min({a0, a1, a2}), amax = std::max({a0, a1, a2});
  const double bmin = std::min({b0, b1, b2}), bmax = std::max({b0, b1, b2});
  return amax < bmin || bmax < amin;
}

struct TriBox {
  Aabb box;
  std::size_t index;
};

std::vector<TriBox> triangle_boxes(const TriMesh& world, const Aabb& region) {
  std::vector<TriBox> out;
  for (std::size_t i = 0; i < world.triangles.size(); ++i) {
    const auto t = world.triangle(i);
    Aabb box = Aabb::of_point(t[0]);
    box.expand(t[1]);
    box.expand(t[2]);
    if (box.overlaps(region)) out.push_back({box, i});
  }
  std::sort(out.begin(), out.end(), [](const TriBox& l, const TriBox& r) {
    return l.box.min.x < r.box.min.x || (l.box.min.x == r.box.min.x && l.index < r.index);
  });
  return out;
}

}  // namespace

bool triangles_intersect(const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b) {
  const std::array<Vec3, 3> ea{a[1] - a[0], a[2] - a[1], a[0] - a[2]};
  const std::array<Vec3, 3> eb{b[1] - b[0], b[2] - b[1], b[0] - b[2]};
  const Vec3 na = ea[0].cross(ea[1]);
  const Vec3 nb = eb[0].cross(eb[1]);

  double scale = 0.0;
  for (const auto& e : ea) scale = std::max(scale, e.squared_norm());
  for (const auto& e : eb) scale = std::max(scale, e.squared_norm());
  const double eps = 1e-20 * scale * scale;

  auto test = [&](const Vec3& axis) { return axis.squared_norm() > eps && separated_on(axis, a, b); };

  if (test(na) || test(nb)) return false;
  for (const auto& u : ea) {
    for (const auto& v : eb) {
      if (test(u.cross(v))) return false;
    }
  }
  // In-plane edge normals cover the coplanar case.
  for (const auto& u : ea) {
    if (test(na.cross(u))) return false;
  }
  for (const auto& v : eb) {
    if (test(nb.cross(v))) return false;
  }
  return true;
}

bool collide(const TriMesh& a, const Pose& pose_a, const TriMesh& b, const Pose& pose_b) {
  if (a.empty() || b.empty()) return false;
  const TriMesh wa = transformed(a, pose_a);
  const TriMesh wb = transformed(b, pose_b);
  const Aabb box_a = aabb_of(wa);
  const Aabb box_b = aabb_of(wb);
  if (!box_a.overlaps(box_b)) return false;

  const auto tris_a = triangle_boxes(wa, box_b);
  const auto tris_b = triangle_boxes(wb, box_a);
  for (const auto& ta : tris_a) {
    for (const auto& tb : tris_b) {
      if (tb.box.min.x > ta.box.max.x) break;  // sorted by min.x
      if (!ta.box.overlaps(tb.box)) continue;
      if (triangles_intersect(wa.triangle(ta.index), wb.triangle(tb.index))) return true;
    }
  }
  return false;
}

bool collides_with_any(const PosedMesh& mesh, std::span<const PosedMesh> assembly) {
  return std::any_of(assembly.begin(), assembly.end(), [&](const PosedMesh& other) { return collide(mesh, other); });
}

bool point_inside(const TriMesh& mesh, const Pose& pose, const Vec3& point) {
  // Parity of crossings along a fixed, deliberately skewed ray. Moller-Trumbore
  // in the mesh's local frame.
  const Pose inv = pose.inverse();
  const Vec3 o = inv.transform_point(point);
  const Vec3 d = inv.transform_vector(Vec3{0.5773502691896258, 0.5773502691896257, 0.5773502691896259} +
                                      Vec3{0.0123456789, -0.0271828183, 0.0314159265});
  int crossings = 0;
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto [a, b, c] = mesh.triangle(i);
    const Vec3 e1 = b - a, e2 = c - a;
    const Vec3 h = d.cross(e2);
    const double det = e1.dot(h);
    if (std::abs(det) < 1e-14) continue;
    const Vec3 s = o - a;
    const double u = s.dot(h) / det;
    if (u < 0.0 || u > 1.0) continue;
    const Vec3 q = s.cross(e1);
    const double v = d.dot(q) / det;
    if (v < 0.0 || u + v > 1.0) continue;
    if (e2.dot(q) / det > 0.0) ++crossings;
  }
  return crossings % 2 == 1;
}

bool solids_overlap(const PosedMesh& a, const PosedMesh& b) {
  if (a.mesh->empty() || b.mesh->empty()) return false;
  if (!aabb_of(*a.mesh, a.pose).overlaps(aabb_of(*b.mesh, b.pose))) return false;
  if (collide(a, b)) return true;
  // No surface contact: either disjoint or one encloses the other.
  return point_inside(*b.mesh, b.pose, a.pose.transform_point(a.mesh->vertices[a.mesh->triangles[0][0]])) ||
         point_inside(*a.mesh, a.pose, b.pose.transform_point(b.mesh->vertices[b.mesh->triangles[0][0]]));
}

bool solids_overlap_any(const PosedMesh& mesh, std::span<const PosedMesh> assembly) {
  return std::any_of(assembly.begin(), assembly.end(),
                     [&](const PosedMesh& other) { return solids_overlap(mesh, other); });
}

}  // namespace artkit
