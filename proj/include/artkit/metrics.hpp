#pragma once

#include <stdexcept>
#include <string>

#include "artkit/geometry.hpp"
#include "artkit/kinematics.hpp"

namespace artkit {

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalConfig {
  double position_threshold = 0.050;  // meters
  double angular_threshold = 0.25;    // radians
  std::size_t chamfer_samples = 2048;  // per link
  double limit_range_threshold = 0.050;
  double limit_direction_threshold = 0.25;
  std::uint64_t chamfer_seed = 0;

  /// Throws EvalError unless every threshold is positive.
  void validate() const;
};

struct LinkError {
  double position_error = 0.0;     // meters
  double orientation_error = 0.0;  // radians, [0, pi]
  bool success = false;
};

/// Position and geodesic orientation error; a component fails only when it
/// strictly exceeds its threshold.
LinkError link_error(const Pose& pred, const Pose& gt, const EvalConfig& cfg = {});

enum class JointVerdict { success, fail_type, fail_axis, fail_origin, fail_limit, missing };

const char* to_string(JointVerdict verdict);

struct JointError {
  int type_error = 0;                  // 0 or 1
  double axis_error = 0.0;             // radians, [0, pi/2]
  double origin_error = 0.0;           // meters
  double limit_range_error = 0.0;
  double limit_direction_error = 0.0;  // [0, 2]
  JointVerdict verdict = JointVerdict::success;
};

/// Joint components between two world-frame joints, with the verdict naming
/// the first failing component in the order type, axis, origin, limit.
///
/// The origin term is the distance between the two axis lines for revolute
/// joints (falling back to point-to-line distance when the axes are parallel)
/// and the distance between origins for prismatic joints; when the types
/// differ the ground truth's kind picks the formula. Fixed/fixed pairs compare
/// only the type. A zero motion range gives a direction error of 0 when both
/// ranges are zero and 2 otherwise.
JointError joint_error(const WorldJoint& pred, const WorldJoint& gt, const EvalConfig& cfg = {});

/// Symmetric mean nearest-neighbor distance (not squared):
/// (mean_a min_b |a-b| + mean_b min_a |a-b|) / 2. Uses a k-d tree.
double chamfer(const PointCloud& a, const PointCloud& b);

/// Exact nearest-neighbor index over a fixed point set.
class KdTree {
 public:
  explicit KdTree(std::vector<Vec3> points);
  /// Distance from `q` to the closest stored point.
  double nearest_distance(const Vec3& q) const;
  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    std::size_t point;
    int axis;
    int left = -1;
    int right = -1;
  };
  int build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth);
  void search(int node, const Vec3& q, double& best_sq) const;

  std::vector<Vec3> points_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace artkit
