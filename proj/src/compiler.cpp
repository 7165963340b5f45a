#include "artkit/compiler.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <set>

#include "artkit/asset_library.hpp"
#include "artkit/mesh_store.hpp"
#include "artkit/obj.hpp"
#include "artkit/urdf.hpp"

namespace artkit {

const char* to_string(CompileErrc code) {
  switch (code) {
    case CompileErrc::placement_failure: return "placement_failure";
    case CompileErrc::joint_resolution_failure: return "joint_resolution_failure";
    case CompileErrc::unresolvable_mesh: return "unresolvable_mesh";
  }
  return "unknown";
}

Pose place_with_collision(const TriMesh& child_mesh, std::span<const PosedMesh> parent_assembly,
                          const PlaceStmt& stmt, int* collision_queries) {
  if (child_mesh.empty()) throw PlacementError("child mesh is empty");
  if (parent_assembly.empty() || parent_assembly.front().mesh == nullptr || parent_assembly.front().mesh->empty()) {
    throw PlacementError("parent mesh is empty");
  }
  const int i = axis_index(stmt.axis);
  const double s = axis_sign(stmt.axis);

  const Aabb child_box = aabb_of(child_mesh);
  const Vec3 child_half = child_box.extent() * 0.5;
  const Aabb parent_box = aabb_of(*parent_assembly.front().mesh, parent_assembly.front().pose);
  const Vec3 parent_center = parent_box.center();

  Aabb assembly_box = parent_box;
  for (const auto& m : parent_assembly) {
    if (m.mesh != nullptr && !m.mesh->empty()) assembly_box.expand(aabb_of(*m.mesh, m.pose));
  }

  Vec3 base = parent_center + stmt.lateral_offset;
  base[i] = parent_center[i];

  auto pose_at = [&](double t) {
    Vec3 center = base;
    center[i] += s * t;
    return Pose::translation(center - child_box.center());
  };
  int queries = 0;
  auto intersects = [&](double t) {
    ++queries;
    return solids_overlap_any(PosedMesh{&child_mesh, pose_at(t)}, parent_assembly);
  };

  const double t_touch = parent_box.extent()[i] * 0.5 + child_half[i];
  const double t_clear_assembly =
      s > 0 ? assembly_box.max[i] + child_half[i] - parent_center[i] : parent_center[i] - assembly_box.min[i] + child_half[i];
  const double t_sep = std::max(t_touch, t_clear_assembly) + 2.0 * kContactTolerance;
  const double t_limit = 10.0 * (assembly_box.extent()[i] + child_box.extent()[i]);
  if (t_sep > t_limit + t_touch) {
    throw PlacementError("no collision-free offset within the search range");
  }

  double contact = t_touch;
  if (intersects(t_touch)) {
    double lo = t_touch;
    double hi = t_sep;
    if (intersects(hi)) throw PlacementError("child still intersects the assembly beyond its bounds");
    while (hi - lo >= kContactTolerance) {
      const double mid = 0.5 * (lo + hi);
      (intersects(mid) ? lo : hi) = mid;
    }
    contact = hi;
  }
  if (collision_queries != nullptr) *collision_queries = queries;
  return pose_at(contact + stmt.clearance);
}

Joint resolve_joint(const JointStmt& stmt, const LinkPoses& world_poses) {
  const auto parent_it = world_poses.find(stmt.parent);
  const auto child_it = world_poses.find(stmt.child);
  if (parent_it == world_poses.end()) throw JointResolveError("no world pose for parent '" + stmt.parent + "'");
  if (child_it == world_poses.end()) throw JointResolveError("no world pose for child '" + stmt.child + "'");
  const Pose& parent = parent_it->second;
  const Pose& child = child_it->second;

  Joint joint;
  joint.name = "joint_" + stmt.child;
  joint.kind = stmt.kind;
  joint.parent = stmt.parent;
  joint.child = stmt.child;

  Pose frame = child;
  Vec3 axis{1.0, 0.0, 0.0};
  if (stmt.kind != JointKind::fixed) {
    if (!(stmt.global_axis.norm() > 1e-12)) throw JointResolveError("joint axis for '" + stmt.child + "' is zero");
    axis = stmt.global_axis.normalized();
  }
  if (stmt.kind == JointKind::revolute) {
    if (!stmt.global_pivot) throw JointResolveError("revolute joint for '" + stmt.child + "' has no pivot");
    const Vec3& pivot = *stmt.global_pivot;
    frame.position = pivot + axis * axis.dot(child.position - pivot);
  }
  joint.origin = parent.inverse() * frame;
  if (stmt.kind != JointKind::fixed) {
    joint.axis = frame.orientation.inverse().rotate(axis).normalized();
    joint.limit = stmt.limit;
  }
  return joint;
}

namespace {

std::filesystem::path find_mesh(const std::string& ref, const std::vector<std::filesystem::path>& dirs) {
  const std::filesystem::path p = ref;
  if (p.is_absolute()) return std::filesystem::exists(p) ? p : std::filesystem::path{};
  for (const auto& d : dirs) {
    const auto candidate = (d / p).lexically_normal();
    if (std::filesystem::exists(candidate)) return candidate;
  }
  return {};
}

struct Part {
  const PartDecl* decl;
  std::filesystem::path resolved;
  std::shared_ptr<const TriMesh> raw;
  TriMesh scaled;
};

}  // namespace

CompileResult compile(const ArtProgram& program, const CompileOptions& options) {
  CompileResult result;
  if (program.parts.empty()) {
    throw CompileError(CompileErrc::placement_failure, {}, "program declares no parts");
  }

  MeshCache cache;
  std::map<std::string, Part, std::less<>> parts;
  for (const auto& decl : program.parts) {
    Part part{&decl, find_mesh(decl.mesh_ref, options.search_dirs), nullptr, {}};
    if (part.resolved.empty()) {
      throw CompileError(CompileErrc::unresolvable_mesh, decl.location,
                         "mesh '" + decl.mesh_ref + "' for part '" + decl.name + "' not found");
    }
    try {
      part.raw = cache.load(part.resolved);
    } catch (const std::exception& e) {
      throw CompileError(CompileErrc::unresolvable_mesh, decl.location, e.what());
    }
    if (part.raw->empty()) {
      throw CompileError(CompileErrc::unresolvable_mesh, decl.location, "mesh '" + decl.mesh_ref + "' has no faces");
    }
    part.scaled = scaled(*part.raw, decl.scale);
    parts.emplace(decl.name, std::move(part));
  }

  const std::string& root = program.parts.front().name;
  LinkPoses& placed = result.placed;
  std::vector<std::string> placement_order;
  std::map<std::string, std::string, std::less<>> placed_on;
  placed.emplace(root, Pose::identity());
  placement_order.push_back(root);

  auto place = [&](const PlaceStmt& stmt) {
    if (stmt.child == root) {
      throw CompileError(CompileErrc::placement_failure, stmt.location, "the root part '" + root + "' cannot be placed");
    }
    if (!placed.contains(stmt.parent)) {
      throw CompileError(CompileErrc::placement_failure, stmt.location,
                         "parent '" + stmt.parent + "' has not been placed yet");
    }
    std::vector<PosedMesh> assembly;
    assembly.push_back({&parts.at(stmt.parent).scaled, placed.at(stmt.parent)});
    for (const auto& name : placement_order) {
      if (name != stmt.parent) assembly.push_back({&parts.at(name).scaled, placed.at(name)});
    }
    int queries = 0;
    try {
      placed.emplace(stmt.child, place_with_collision(parts.at(stmt.child).scaled, assembly, stmt, &queries));
    } catch (const std::exception& e) {
      throw CompileError(CompileErrc::placement_failure, stmt.location, e.what());
    }
    placement_order.push_back(stmt.child);
    placed_on.emplace(stmt.child, stmt.parent);
    result.diagnostics.collision_iterations.emplace_back(stmt.location, queries);
  };

  for (const auto& stmt : program.statements) {
    if (const auto* p = std::get_if<PlaceStmt>(&stmt)) place(*p);
  }
  for (const auto& decl : program.parts) {
    if (placed.contains(decl.name)) continue;
    result.diagnostics.warnings.emplace_back(
        decl.location, "part '" + decl.name + "' has no placement; stacked on '" + root + "' along +z");
    PlaceStmt implicit;
    implicit.child = decl.name;
    implicit.parent = root;
    implicit.axis = PlaceAxis::pos_z;
    implicit.location = decl.location;
    place(implicit);
  }

  // Tree structure: joint statements win over placement parents.
  std::map<std::string, const JointStmt*, std::less<>> joint_of;
  for (const auto& stmt : program.statements) {
    if (const auto* j = std::get_if<JointStmt>(&stmt)) {
      if (j->child == root) {
        throw CompileError(CompileErrc::joint_resolution_failure, j->location,
                           "the root part '" + root + "' cannot be a joint child");
      }
      joint_of.emplace(j->child, j);
    }
  }
  std::map<std::string, std::string, std::less<>> parent_of;
  for (const auto& decl : program.parts) {
    if (decl.name == root) continue;
    if (auto it = joint_of.find(decl.name); it != joint_of.end()) {
      parent_of[decl.name] = it->second->parent;
    } else {
      parent_of[decl.name] = placed_on.at(decl.name);
    }
  }
  for (const auto& [child, parent] : parent_of) {
    std::string cur = child;
    for (std::size_t steps = 0; cur != root; ++steps) {
      if (steps > parent_of.size()) {
        const JointStmt* j = joint_of.contains(child) ? joint_of.at(child) : nullptr;
        throw CompileError(CompileErrc::joint_resolution_failure, j ? j->location : parts.at(child).decl->location,
                           "joints form a cycle through '" + child + "'");
      }
      cur = parent_of.at(cur);
    }
  }

  // Link frames, parents first.
  LinkPoses frames;
  frames.emplace(root, Pose::identity());
  std::map<std::string, Joint, std::less<>> joints;
  while (frames.size() < program.parts.size()) {
    for (const auto& decl : program.parts) {
      if (frames.contains(decl.name)) continue;
      const std::string& parent = parent_of.at(decl.name);
      if (!frames.contains(parent)) continue;
      Joint joint;
      if (auto it = joint_of.find(decl.name); it != joint_of.end()) {
        LinkPoses world{{parent, frames.at(parent)}, {decl.name, placed.at(decl.name)}};
        try {
          joint = resolve_joint(*it->second, world);
        } catch (const std::exception& e) {
          throw CompileError(CompileErrc::joint_resolution_failure, it->second->location, e.what());
        }
      } else {
        JointStmt fixed;
        fixed.child = decl.name;
        fixed.parent = parent;
        joint = resolve_joint(fixed, {{parent, frames.at(parent)}, {decl.name, placed.at(decl.name)}});
      }
      frames.emplace(decl.name, frames.at(parent) * joint.origin);
      joints.emplace(decl.name, std::move(joint));
    }
  }

  UrdfModel& model = result.model;
  model.name = options.model_name;
  model.base_dir = options.output_dir;
  for (const auto& decl : program.parts) {
    const Part& part = parts.at(decl.name);
    Link link;
    link.name = decl.name;
    link.mesh = part.raw;
    link.mesh_scale = decl.scale;
    link.visual_origin = frames.at(decl.name).inverse() * placed.at(decl.name);
    if (options.output_dir.empty()) {
      link.mesh_path = part.resolved.generic_string();
    } else {
      link.mesh_path =
          std::filesystem::absolute(part.resolved).lexically_relative(std::filesystem::absolute(options.output_dir)).generic_string();
    }
    model.links.push_back(std::move(link));
  }
  for (const auto& decl : program.parts) {
    if (decl.name != root) model.joints.push_back(joints.at(decl.name));
  }
  validate_model(model);
  return result;
}

CompileResult compile(const ArtProgram& program, const AssetLibrary& library, CompileOptions options) {
  options.search_dirs.push_back(library.root_dir());
  return compile(program, options);
}

}  // namespace artkit
