#include "artkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace artkit {

void EvalConfig::validate() const {
  if (!(position_threshold > 0 && angular_threshold > 0 && limit_range_threshold > 0 &&
        limit_direction_threshold > 0)) {
    throw EvalError("evaluation thresholds must be positive");
  }
  if (chamfer_samples == 0) throw EvalError("chamfer_samples must be positive");
}

LinkError link_error(const Pose& pred, const Pose& gt, const EvalConfig& cfg) {
  LinkError e;
  e.position_error = distance(pred.position, gt.position);
  e.orientation_error = quat_geodesic(pred.orientation, gt.orientation);
  e.success = !(e.position_error > cfg.position_threshold) && !(e.orientation_error > cfg.angular_threshold);
  return e;
}

const char* to_string(JointVerdict verdict) {
  switch (verdict) {
    case JointVerdict::success: return "success";
    case JointVerdict::fail_type: return "type";
    case JointVerdict::fail_axis: return "axis";
    case JointVerdict::fail_origin: return "origin";
    case JointVerdict::fail_limit: return "limit";
    case JointVerdict::missing: return "missing";
  }
  return "unknown";
}

namespace {

/// Parallel-axis cutoff for the line-line distance formula.
constexpr double kParallelCross = 1e-9;

}  // namespace

JointError joint_error(const WorldJoint& pred, const WorldJoint& gt, const EvalConfig& cfg) {
  JointError e;
  e.type_error = pred.kind == gt.kind ? 0 : 1;
  if (pred.kind == JointKind::fixed && gt.kind == JointKind::fixed) return e;

  const Vec3 ap = pred.axis.normalized();
  const Vec3 ag = gt.axis.normalized();
  // Line angle in [0, pi/2]; atan2 keeps precision where acos of the dot does not.
  e.axis_error = std::atan2(ap.cross(ag).norm(), std::abs(ap.dot(ag)));

  const Vec3 p = pred.origin - gt.origin;
  if (gt.kind == JointKind::revolute) {
    const Vec3 c = ap.cross(ag);
    const double cn = c.norm();
    e.origin_error = cn < kParallelCross ? p.cross(ag).norm() : std::abs(p.dot(c)) / cn;
  } else {
    e.origin_error = p.norm();
  }

  const Vec3 mp = ap * (pred.limit.upper - pred.limit.lower);
  const Vec3 mg = ag * (gt.limit.upper - gt.limit.lower);
  e.limit_range_error = (mp - mg).norm();
  const double np = mp.norm();
  const double ng = mg.norm();
  if (np == 0.0 && ng == 0.0) {
    e.limit_direction_error = 0.0;
  } else if (np == 0.0 || ng == 0.0) {
    e.limit_direction_error = 2.0;
  } else {
    e.limit_direction_error = std::clamp(1.0 - mp.dot(mg) / (np * ng), 0.0, 2.0);
  }

  if (e.type_error != 0) {
    e.verdict = JointVerdict::fail_type;
  } else if (e.axis_error > cfg.angular_threshold) {
    e.verdict = JointVerdict::fail_axis;
  } else if (e.origin_error > cfg.position_threshold) {
    e.verdict = JointVerdict::fail_origin;
  } else if (e.limit_range_error > cfg.limit_range_threshold ||
             e.limit_direction_error > cfg.limit_direction_threshold) {
    e.verdict = JointVerdict::fail_limit;
  }
  return e;
}

KdTree::KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) return;
  std::vector<std::size_t> idx(points_.size());
  std::iota(idx.begin(), idx.end(), 0);
  nodes_.reserve(points_.size());
  root_ = build(idx, 0, idx.size(), 0);
}

int KdTree::build(std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth) {
  if (lo >= hi) return -1;
  const int axis = depth % 3;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(mid),
                   idx.begin() + static_cast<std::ptrdiff_t>(hi),
                   [&](std::size_t a, std::size_t b) { return points_[a][axis] < points_[b][axis]; });
  const int node = static_cast<int>(nodes_.size());
  nodes_.push_back({idx[mid], axis});
  const int left = build(idx, lo, mid, depth + 1);
  const int right = build(idx, mid + 1, hi, depth + 1);
  nodes_[node].left = left;
  nodes_[node].right = right;
  return node;
}

void KdTree::search(int node, const Vec3& q, double& best_sq) const {
  if (node < 0) return;
  const Node& n = nodes_[node];
  const Vec3& p = points_[n.point];
  best_sq = std::min(best_sq, (p - q).squared_norm());
  const double delta = q[n.axis] - p[n.axis];
  const int near_side = delta < 0 ? n.left : n.right;
  const int far_side = delta < 0 ? n.right : n.left;
  search(near_side, q, best_sq);
  if (delta * delta <= best_sq) search(far_side, q, best_sq);
}

double KdTree::nearest_distance(const Vec3& q) const {
  if (root_ < 0) throw EvalError("nearest neighbor in an empty set");
  double best = std::numeric_limits<double>::infinity();
  search(root_, q, best);
  return std::sqrt(best);
}

double chamfer(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) throw EvalError("chamfer distance of an empty point cloud");
  const KdTree ta(a.points);
  const KdTree tb(b.points);
  double sum_ab = 0.0;
  for (const auto& p : a.points) sum_ab += tb.nearest_distance(p);
  double sum_ba = 0.0;
  for (const auto& p : b.points) sum_ba += ta.nearest_distance(p);
  return 0.5 * (sum_ab / static_cast<double>(a.size()) + sum_ba / static_cast<double>(b.size()));
}

}  // namespace artkit
