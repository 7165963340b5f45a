#pragma once

#include <array>
#include <span>

#include "artkit/geometry.hpp"

namespace artkit {

/// A mesh placed in the world.
struct PosedMesh {
  const TriMesh* mesh = nullptr;
  Pose pose;
};

/// Separating-axis test on closed triangles: touching counts as intersecting.
bool triangles_intersect(const std::array<Vec3, 3>& a, const std::array<Vec3, 3>& b);

/// True iff any triangle of `a` intersects any triangle of `b`. Bounds are
/// checked first (whole mesh, then a sweep over per-triangle boxes); only
/// overlapping pairs reach the triangle test.
bool collide(const TriMesh& a, const Pose& pose_a, const TriMesh& b, const Pose& pose_b);
inline bool collide(const PosedMesh& a, const PosedMesh& b) { return collide(*a.mesh, a.pose, *b.mesh, b.pose); }

/// True iff `mesh` collides with any member of `assembly`.
bool collides_with_any(const PosedMesh& mesh, std::span<const PosedMesh> assembly);

/// Ray-parity inside test for a closed mesh.
bool point_inside(const TriMesh& mesh, const Pose& pose, const Vec3& point);

/// Surface contact, or one closed mesh enclosing the other.
bool solids_overlap(const PosedMesh& a, const PosedMesh& b);
bool solids_overlap_any(const PosedMesh& mesh, std::span<const PosedMesh> assembly);

}  // namespace artkit
