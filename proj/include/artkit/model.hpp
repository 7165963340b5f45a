#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "artkit/geometry.hpp"

namespace artkit {

enum class JointKind { fixed, prismatic, revolute };

const char* to_string(JointKind kind);
std::optional<JointKind> joint_kind_from_string(std::string_view text);

struct JointLimit {
  double lower = 0.0;  // radians (revolute) or meters (prismatic)
  double upper = 0.0;
};

struct Link {
  std::string name;
  /// Mesh file, relative to the model directory. Empty when the link has no visual.
  std::string mesh_path;
  /// Preloaded or inline geometry; takes precedence over mesh_path when set.
  std::shared_ptr<const TriMesh> mesh;
  Vec3 mesh_scale{1.0, 1.0, 1.0};
  Pose visual_origin;

  bool has_visual() const { return mesh != nullptr || !mesh_path.empty(); }
};

struct Joint {
  std::string name;
  JointKind kind = JointKind::fixed;
  std::string parent;
  std::string child;
  Pose origin;  // joint frame relative to the parent link frame
  Vec3 axis{1.0, 0.0, 0.0};  // unit, in the joint frame
  std::optional<JointLimit> limit;  // absent for fixed joints
};

/// A tree of links connected by joints. Use validate_model() (or the URDF
/// parser) to establish the tree invariants.
struct UrdfModel {
  std::string name;
  std::vector<Link> links;
  std::vector<Joint> joints;
  /// Directory that relative mesh paths resolve against. Not serialized.
  std::filesystem::path base_dir;

  const Link* find_link(std::string_view link_name) const;
  const Joint* find_joint(std::string_view joint_name) const;
  /// Joint whose child is `link_name`, or nullptr for the root.
  const Joint* parent_joint(std::string_view link_name) const;
  /// Name of the unique root link. Requires a validated model.
  const std::string& root() const;
  /// Joints ordered so that every parent link is posed before its children.
  std::vector<const Joint*> topological_joints() const;
};

using JointValues = std::map<std::string, double, std::less<>>;
using LinkPoses = std::map<std::string, Pose, std::less<>>;

}  // namespace artkit
