#include "artkit/model.hpp"

#include <deque>
#include <set>
#include <stdexcept>

#include "artkit/kinematics.hpp"

namespace artkit {

const char* to_string(JointKind kind) {
  switch (kind) {
    case JointKind::fixed: return "fixed";
    case JointKind::prismatic: return "prismatic";
    case JointKind::revolute: return "revolute";
  }
  return "fixed";
}

std::optional<JointKind> joint_kind_from_string(std::string_view text) {
  if (text == "fixed") return JointKind::fixed;
  if (text == "prismatic") return JointKind::prismatic;
  if (text == "revolute") return JointKind::revolute;
  return std::nullopt;
}

const Link* UrdfModel::find_link(std::string_view link_name) const {
  for (const auto& l : links) {
    if (l.name == link_name) return &l;
  }
  return nullptr;
}

const Joint* UrdfModel::find_joint(std::string_view joint_name) const {
  for (const auto& j : joints) {
    if (j.name == joint_name) return &j;
  }
  return nullptr;
}

const Joint* UrdfModel::parent_joint(std::string_view link_name) const {
  for (const auto& j : joints) {
    if (j.child == link_name) return &j;
  }
  return nullptr;
}

const std::string& UrdfModel::root() const {
  for (const auto& l : links) {
    if (parent_joint(l.name) == nullptr) return l.name;
  }
  throw KinematicsError(KinematicsError::Code::not_a_tree, "model '" + name + "' has no root link");
}

std::vector<const Joint*> UrdfModel::topological_joints() const {
  std::vector<const Joint*> order;
  order.reserve(joints.size());
  std::deque<std::string> frontier{root()};
  std::set<std::string, std::less<>> seen{root()};
  while (!frontier.empty()) {
    const std::string link = frontier.front();
    frontier.pop_front();
    for (const auto& j : joints) {
      if (j.parent != link) continue;
      if (!seen.insert(j.child).second) {
        throw KinematicsError(KinematicsError::Code::not_a_tree,
                              "link '" + j.child + "' is reached twice");
      }
      order.push_back(&j);
      frontier.push_back(j.child);
    }
  }
  if (order.size() != joints.size()) {
    throw KinematicsError(KinematicsError::Code::not_a_tree,
                          "model '" + name + "' has joints unreachable from the root");
  }
  return order;
}

}  // namespace artkit
