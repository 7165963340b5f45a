#pragma once

#include <stdexcept>
#include <string>

#include "artkit/model.hpp"

namespace artkit {

class KinematicsError : public std::runtime_error {
 public:
  enum class Code { unknown_joint, out_of_limits, not_a_tree };
  KinematicsError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const { return code_; }

 private:
  Code code_;
};

/// Slack allowed on joint limits before a value is rejected.
inline constexpr double kLimitSlack = 1e-9;

/// Rigid motion a joint applies at `value`: rotation about the axis for
/// revolute, translation along it for prismatic, identity for fixed.
Pose joint_motion(const Joint& joint, double value);

/// World pose of every link frame. The root sits at the identity; each child is
/// parent ∘ joint origin ∘ joint motion. Missing joint values default to 0.
LinkPoses forward_kinematics(const UrdfModel& model, const JointValues& joint_values = {});

/// A joint expressed in the world frame at a given configuration.
struct WorldJoint {
  std::string name;
  JointKind kind = JointKind::fixed;
  std::string parent;
  std::string child;
  Vec3 origin;  // joint frame origin, world coordinates
  Vec3 axis;    // unit direction, world coordinates
  JointLimit limit;
};

/// World-frame version of `joint` given link poses from forward_kinematics.
WorldJoint to_world(const Joint& joint, const LinkPoses& poses);

}  // namespace artkit
