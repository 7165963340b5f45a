#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "artkit/mesh_store.hpp"
#include "artkit/metrics.hpp"
#include "artkit/model.hpp"

namespace artkit {

inline constexpr std::string_view kReportSchema = "artkit.eval_report/1";

/// Predicted link name -> ground-truth link name.
using LinkMatching = std::map<std::string, std::string, std::less<>>;

/// Which point of a link is compared. `frame` uses the link frame from forward
/// kinematics at zero joint values; `centroid` keeps the frame orientation but
/// uses the world surface centroid of the link's geometry as its position.
enum class LinkPoseMode { frame, centroid };

struct EvalOptions {
  LinkPoseMode pose_mode = LinkPoseMode::frame;
  bool compute_chamfer = true;
};

struct LinkResult {
  std::string gt_link;
  std::string pred_link;            // empty when unmatched
  std::optional<LinkError> error;   // absent when unmatched
  std::optional<double> chamfer;    // absent when either side lacks geometry
  bool success = false;
};

struct JointResult {
  std::string gt_joint;
  std::string gt_child;
  std::string pred_joint;           // empty when the prediction has no such joint
  std::optional<JointError> error;  // absent when missing
  JointVerdict verdict = JointVerdict::missing;
  bool failed_by_link = false;      // marked failed because a link failed
  bool success = false;
};

/// Most egregious failure of one object, in reporting order.
enum class FailureKind { none, invalid, link, type, axis, origin, limit };

const char* to_string(FailureKind kind);

struct EvalReport {
  std::string object_id;
  bool invalid = false;  // prediction could not be parsed or compiled
  std::string invalid_reason;
  std::vector<LinkResult> links;
  std::vector<JointResult> joints;  // one per movable ground-truth joint
  bool object_link_success = false;
  bool object_joint_success = false;
  /// Sum of per-link chamfer distances (meters).
  double mesh_loss = 0.0;
  /// Mean over links of (position_error + orientation_error) / 2. Mixes meters
  /// and radians; reported for reference only, success never uses it.
  double link_error_blended = 0.0;

  FailureKind failure() const;
};

/// Report for a prediction that never produced a valid model.
EvalReport invalid_report(std::string object_id, std::string reason, const UrdfModel& gt);

/// Identity matching on shared link names.
LinkMatching match_by_name(const UrdfModel& pred, const UrdfModel& gt);

/// Minimum total chamfer assignment (Hungarian) between link point clouds at
/// zero joint values. Links without geometry fall back to name matching.
LinkMatching match_by_chamfer(const UrdfModel& pred, const UrdfModel& gt, const EvalConfig& cfg,
                              const MeshCache& cache);

/// Compares `pred` against `gt`. Every ground-truth link and every movable
/// ground-truth joint gets a result; unmatched ones fail. If any link fails,
/// every joint is marked failed.
EvalReport evaluate(const UrdfModel& pred, const UrdfModel& gt, const LinkMatching& matching,
                    const EvalConfig& cfg, const MeshCache& cache, const EvalOptions& options = {});

std::string report_to_json(const EvalReport& report);
EvalReport report_from_json(std::string_view text);
/// One row per link and joint: the per-component error table.
std::string report_to_csv(const EvalReport& report);
std::string report_to_text(const EvalReport& report);

}  // namespace artkit
