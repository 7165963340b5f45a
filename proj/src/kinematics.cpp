#include "artkit/kinematics.hpp"

#include <set>

namespace artkit {

Pose joint_motion(const Joint& joint, double value) {
  switch (joint.kind) {
    case JointKind::revolute:
      return Pose::rotation(UnitQuat::from_axis_angle(joint.axis, value));
    case JointKind::prismatic:
      return Pose::translation(joint.axis.normalized() * value);
    case JointKind::fixed:
      break;
  }
  return Pose::identity();
}

LinkPoses forward_kinematics(const UrdfModel& model, const JointValues& joint_values) {
  for (const auto& [name, value] : joint_values) {
    const Joint* joint = model.find_joint(name);
    if (joint == nullptr) {
      throw KinematicsError(KinematicsError::Code::unknown_joint, "unknown joint '" + name + "'");
    }
    const JointLimit limit = joint->limit.value_or(JointLimit{});
    if (value < limit.lower - kLimitSlack || value > limit.upper + kLimitSlack) {
      throw KinematicsError(KinematicsError::Code::out_of_limits,
                            "joint '" + name + "' value " + std::to_string(value) + " outside [" +
                                std::to_string(limit.lower) + ", " + std::to_string(limit.upper) + "]");
    }
  }

  LinkPoses poses;
  poses.emplace(model.root(), Pose::identity());
  for (const Joint* joint : model.topological_joints()) {
    double value = 0.0;
    if (auto it = joint_values.find(joint->name); it != joint_values.end()) value = it->second;
    const Pose& parent = poses.at(joint->parent);
    poses.emplace(joint->child, parent * joint->origin * joint_motion(*joint, value));
  }
  return poses;
}

WorldJoint to_world(const Joint& joint, const LinkPoses& poses) {
  const Pose frame = poses.at(joint.parent) * joint.origin;
  WorldJoint w;
  w.name = joint.name;
  w.kind = joint.kind;
  w.parent = joint.parent;
  w.child = joint.child;
  w.origin = frame.position;
  w.axis = frame.transform_vector(joint.axis).normalized();
  w.limit = joint.limit.value_or(JointLimit{});
  return w;
}

}  // namespace artkit
