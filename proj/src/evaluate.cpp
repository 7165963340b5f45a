#include "artkit/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace artkit {

using nlohmann::json;

const char* to_string(FailureKind kind) {
  switch (kind) {
    case FailureKind::none: return "none";
    case FailureKind::invalid: return "invalid";
    case FailureKind::link: return "link";
    case FailureKind::type: return "type";
    case FailureKind::axis: return "axis";
    case FailureKind::origin: return "origin";
    case FailureKind::limit: return "limit";
  }
  return "none";
}

namespace {

FailureKind failure_of(JointVerdict v) {
  switch (v) {
    case JointVerdict::success: return FailureKind::none;
    case JointVerdict::fail_type:
    case JointVerdict::missing: return FailureKind::type;
    case JointVerdict::fail_axis: return FailureKind::axis;
    case JointVerdict::fail_origin: return FailureKind::origin;
    case JointVerdict::fail_limit: return FailureKind::limit;
  }
  return FailureKind::none;
}

std::optional<JointVerdict> verdict_from_string(std::string_view s) {
  for (auto v : {JointVerdict::success, JointVerdict::fail_type, JointVerdict::fail_axis, JointVerdict::fail_origin,
                 JointVerdict::fail_limit, JointVerdict::missing}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

std::vector<const Joint*> movable_joints(const UrdfModel& m) {
  std::vector<const Joint*> out;
  for (const auto& j : m.joints) {
    if (j.kind != JointKind::fixed) out.push_back(&j);
  }
  return out;
}

/// Rows <= cols. Returns the column assigned to each row.
std::vector<int> hungarian(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const int m = n == 0 ? 0 : static_cast<int>(cost[0].size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> p(m + 1, 0), way(m + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (p[j] != 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

}  // namespace

FailureKind EvalReport::failure() const {
  if (invalid) return FailureKind::invalid;
  if (!object_link_success) return FailureKind::link;
  FailureKind worst = FailureKind::none;
  for (const auto& j : joints) {
    const FailureKind f = failure_of(j.verdict);
    if (f != FailureKind::none && (worst == FailureKind::none || f < worst)) worst = f;
  }
  return worst;
}

EvalReport invalid_report(std::string object_id, std::string reason, const UrdfModel& gt) {
  EvalReport r;
  r.object_id = std::move(object_id);
  r.invalid = true;
  r.invalid_reason = std::move(reason);
  for (const auto& l : gt.links) r.links.push_back({l.name, {}, std::nullopt, std::nullopt, false});
  for (const Joint* j : movable_joints(gt)) {
    JointResult jr;
    jr.gt_joint = j->name;
    jr.gt_child = j->child;
    r.joints.push_back(jr);
  }
  return r;
}

LinkMatching match_by_name(const UrdfModel& pred, const UrdfModel& gt) {
  LinkMatching m;
  for (const auto& l : pred.links) {
    if (gt.find_link(l.name) != nullptr) m.emplace(l.name, l.name);
  }
  return m;
}

LinkMatching match_by_chamfer(const UrdfModel& pred, const UrdfModel& gt, const EvalConfig& cfg,
                              const MeshCache& cache) {
  const auto pc = model_point_clouds(pred, {}, cfg.chamfer_samples, cfg.chamfer_seed, cache);
  const auto gc = model_point_clouds(gt, {}, cfg.chamfer_samples, cfg.chamfer_seed, cache);
  std::vector<std::string> pn, gn;
  for (const auto& [name, cloud] : pc) pn.push_back(name);
  for (const auto& [name, cloud] : gc) gn.push_back(name);

  LinkMatching m;
  if (!pn.empty() && !gn.empty()) {
    const bool transpose = pn.size() > gn.size();
    const auto& rows = transpose ? gn : pn;
    const auto& cols = transpose ? pn : gn;
    std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(cols.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        const auto& a = transpose ? gc.at(rows[r]) : pc.at(rows[r]);
        const auto& b = transpose ? pc.at(cols[c]) : gc.at(cols[c]);
        cost[r][c] = chamfer(a, b);
      }
    }
    const auto assign = hungarian(cost);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (assign[r] < 0) continue;
      if (transpose) {
        m.emplace(cols[static_cast<std::size_t>(assign[r])], rows[r]);
      } else {
        m.emplace(rows[r], cols[static_cast<std::size_t>(assign[r])]);
      }
    }
  }
  // Geometry-less links (e.g. an empty base) keep name matching when free.
  std::set<std::string, std::less<>> used_gt;
  for (const auto& [p, g] : m) used_gt.insert(g);
  for (const auto& l : pred.links) {
    if (pc.contains(l.name) || m.contains(l.name)) continue;
    if (gt.find_link(l.name) != nullptr && !gc.contains(l.name) && !used_gt.contains(l.name)) {
      m.emplace(l.name, l.name);
      used_gt.insert(l.name);
    }
  }
  return m;
}

EvalReport evaluate(const UrdfModel& pred, const UrdfModel& gt, const LinkMatching& matching,
                    const EvalConfig& cfg, const MeshCache& cache, const EvalOptions& options) {
  cfg.validate();
  std::map<std::string, std::string, std::less<>> gt_to_pred;
  for (const auto& [p, g] : matching) {
    if (pred.find_link(p) == nullptr) throw EvalError("matching names unknown predicted link '" + p + "'");
    if (gt.find_link(g) == nullptr) throw EvalError("matching names unknown ground-truth link '" + g + "'");
    if (!gt_to_pred.emplace(g, p).second) throw EvalError("matching maps two links onto '" + g + "'");
  }

  const LinkPoses pred_fk = forward_kinematics(pred);
  const LinkPoses gt_fk = forward_kinematics(gt);

  auto link_pose = [&](const UrdfModel& model, const LinkPoses& fk, const Link& link) {
    Pose pose = fk.at(link.name);
    if (options.pose_mode == LinkPoseMode::centroid) {
      if (auto geom = link_geometry(model, link, cache); geom && !geom->empty()) {
        pose.position = pose.transform_point(surface_centroid(*geom));
      }
    }
    return pose;
  };

  std::map<std::string, PointCloud, std::less<>> pred_clouds, gt_clouds;
  if (options.compute_chamfer) {
    pred_clouds = model_point_clouds(pred, {}, cfg.chamfer_samples, cfg.chamfer_seed, cache);
    gt_clouds = model_point_clouds(gt, {}, cfg.chamfer_samples, cfg.chamfer_seed, cache);
  }

  EvalReport report;
  report.object_id = gt.name;
  report.object_link_success = true;
  double blended_sum = 0.0;
  std::size_t blended_n = 0;
  for (const auto& gl : gt.links) {
    LinkResult r;
    r.gt_link = gl.name;
    if (auto it = gt_to_pred.find(gl.name); it != gt_to_pred.end()) {
      r.pred_link = it->second;
      const Link& pl = *pred.find_link(r.pred_link);
      r.error = link_error(link_pose(pred, pred_fk, pl), link_pose(gt, gt_fk, gl), cfg);
      r.success = r.error->success;
      blended_sum += 0.5 * (r.error->position_error + r.error->orientation_error);
      ++blended_n;
      const auto pcit = pred_clouds.find(r.pred_link);
      const auto gcit = gt_clouds.find(gl.name);
      if (pcit != pred_clouds.end() && gcit != gt_clouds.end()) {
        r.chamfer = chamfer(pcit->second, gcit->second);
        report.mesh_loss += *r.chamfer;
      }
    }
    report.object_link_success = report.object_link_success && r.success;
    report.links.push_back(std::move(r));
  }
  report.link_error_blended = blended_n > 0 ? blended_sum / static_cast<double>(blended_n) : 0.0;

  report.object_joint_success = report.object_link_success;
  for (const Joint* gj : movable_joints(gt)) {
    JointResult r;
    r.gt_joint = gj->name;
    r.gt_child = gj->child;
    const Joint* pj = nullptr;
    if (auto it = gt_to_pred.find(gj->child); it != gt_to_pred.end()) pj = pred.parent_joint(it->second);
    if (pj != nullptr) {
      r.pred_joint = pj->name;
      r.error = joint_error(to_world(*pj, pred_fk), to_world(*gj, gt_fk), cfg);
      r.verdict = r.error->verdict;
    } else {
      r.verdict = JointVerdict::missing;
    }
    r.success = r.verdict == JointVerdict::success;
    if (!report.object_link_success) {
      r.success = false;
      r.failed_by_link = true;
    }
    report.object_joint_success = report.object_joint_success && r.success;
    report.joints.push_back(std::move(r));
  }
  return report;
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

std::string report_to_json(const EvalReport& report) {
  json doc;
  doc["schema"] = kReportSchema;
  doc["object_id"] = report.object_id;
  doc["invalid"] = report.invalid;
  if (report.invalid) doc["invalid_reason"] = report.invalid_reason;
  doc["object_link_success"] = report.object_link_success;
  doc["object_joint_success"] = report.object_joint_success;
  doc["failure"] = to_string(report.failure());
  doc["chamfer_variant"] = "symmetric_mean_nearest_neighbor_meters";
  doc["mesh_loss"] = report.mesh_loss;
  doc["link_error_blended"] = report.link_error_blended;
  json links = json::array();
  for (const auto& l : report.links) {
    json j;
    j["gt_link"] = l.gt_link;
    j["pred_link"] = l.pred_link.empty() ? json(nullptr) : json(l.pred_link);
    j["position_error"] = l.error ? json(l.error->position_error) : json(nullptr);
    j["orientation_error"] = l.error ? json(l.error->orientation_error) : json(nullptr);
    j["chamfer"] = opt(l.chamfer);
    j["success"] = l.success;
    links.push_back(j);
  }
  doc["links"] = links;
  json joints = json::array();
  for (const auto& r : report.joints) {
    json j;
    j["gt_joint"] = r.gt_joint;
    j["gt_child"] = r.gt_child;
    j["pred_joint"] = r.pred_joint.empty() ? json(nullptr) : json(r.pred_joint);
    if (r.error) {
      j["type_error"] = r.error->type_error;
      j["axis_error"] = r.error->axis_error;
      j["origin_error"] = r.error->origin_error;
      j["limit_range_error"] = r.error->limit_range_error;
      j["limit_direction_error"] = r.error->limit_direction_error;
    }
    j["verdict"] = to_string(r.verdict);
    j["failed_by_link"] = r.failed_by_link;
    j["success"] = r.success;
    joints.push_back(j);
  }
  doc["joints"] = joints;
  return doc.dump(2) + "\n";
}

EvalReport report_from_json(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.value("schema", "") != kReportSchema) {
      throw EvalError("unsupported report schema '" + doc.value("schema", "") + "'");
    }
    EvalReport r;
    r.object_id = doc.value("object_id", "");
    r.invalid = doc.value("invalid", false);
    r.invalid_reason = doc.value("invalid_reason", "");
    r.object_link_success = doc.at("object_link_success").get<bool>();
    r.object_joint_success = doc.at("object_joint_success").get<bool>();
    r.mesh_loss = doc.value("mesh_loss", 0.0);
    r.link_error_blended = doc.value("link_error_blended", 0.0);
    for (const auto& j : doc.at("links")) {
      LinkResult l;
      l.gt_link = j.at("gt_link").get<std::string>();
      if (!j.at("pred_link").is_null()) l.pred_link = j.at("pred_link").get<std::string>();
      if (!j.at("position_error").is_null()) {
        l.error = LinkError{j.at("position_error").get<double>(), j.at("orientation_error").get<double>(),
                            j.at("success").get<bool>()};
      }
      if (j.contains("chamfer") && !j.at("chamfer").is_null()) l.chamfer = j.at("chamfer").get<double>();
      l.success = j.at("success").get<bool>();
      r.links.push_back(std::move(l));
    }
    for (const auto& j : doc.at("joints")) {
      JointResult jr;
      jr.gt_joint = j.at("gt_joint").get<std::string>();
      jr.gt_child = j.value("gt_child", "");
      if (!j.at("pred_joint").is_null()) jr.pred_joint = j.at("pred_joint").get<std::string>();
      const auto verdict = verdict_from_string(j.at("verdict").get<std::string>());
      if (!verdict) throw EvalError("unknown verdict '" + j.at("verdict").get<std::string>() + "'");
      jr.verdict = *verdict;
      if (j.contains("axis_error")) {
        JointError e;
        e.type_error = j.at("type_error").get<int>();
        e.axis_error = j.at("axis_error").get<double>();
        e.origin_error = j.at("origin_error").get<double>();
        e.limit_range_error = j.at("limit_range_error").get<double>();
        e.limit_direction_error = j.at("limit_direction_error").get<double>();
        e.verdict = jr.verdict;
        jr.error = e;
      }
      jr.failed_by_link = j.value("failed_by_link", false);
      jr.success = j.at("success").get<bool>();
      r.joints.push_back(std::move(jr));
    }
    return r;
  } catch (const json::exception& e) {
    throw EvalError(std::string("malformed report: ") + e.what());
  }
}

namespace {

std::string cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(9) << *v;
  return s.str();
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "object_id,kind,gt_name,pred_name,position_error,orientation_error,chamfer,type_error,axis_error,"
         "origin_error,limit_range_error,limit_direction_error,verdict,success\n";
  const std::string obj = csv_escape(report.object_id);
  for (const auto& l : report.links) {
    out << obj << ",link," << csv_escape(l.gt_link) << ',' << csv_escape(l.pred_link) << ','
        << cell(l.error ? std::optional(l.error->position_error) : std::nullopt) << ','
        << cell(l.error ? std::optional(l.error->orientation_error) : std::nullopt) << ',' << cell(l.chamfer)
        << ",,,,,," << (l.success ? "success" : (l.error ? "link" : "missing")) << ',' << (l.success ? 1 : 0)
        << '\n';
  }
  for (const auto& j : report.joints) {
    const auto& e = j.error;
    out << obj << ",joint," << csv_escape(j.gt_joint) << ',' << csv_escape(j.pred_joint) << ",,,,"
        << (e ? std::to_string(e->type_error) : "") << ',' << cell(e ? std::optional(e->axis_error) : std::nullopt)
        << ',' << cell(e ? std::optional(e->origin_error) : std::nullopt) << ','
        << cell(e ? std::optional(e->limit_range_error) : std::nullopt) << ','
        << cell(e ? std::optional(e->limit_direction_error) : std::nullopt) << ',' << to_string(j.verdict) << ','
        << (j.success ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string report_to_text(const EvalReport& report) {
  std::ostringstream out;
  out << std::setprecision(6);
  out << "object " << report.object_id << ": links " << (report.object_link_success ? "OK" : "FAIL") << ", joints "
      << (report.object_joint_success ? "OK" : "FAIL") << " (failure: " << to_string(report.failure()) << ")\n";
  if (report.invalid) out << "  invalid prediction: " << report.invalid_reason << '\n';
  for (const auto& l : report.links) {
    out << "  link " << l.gt_link;
    if (!l.error) {
      out << ": unmatched\n";
      continue;
    }
    out << " <- " << l.pred_link << ": pos " << l.error->position_error << " m, orient " << l.error->orientation_error
        << " rad";
    if (l.chamfer) out << ", chamfer " << *l.chamfer << " m";
    out << (l.success ? "  ok" : "  FAIL") << '\n';
  }
  for (const auto& j : report.joints) {
    out << "  joint " << j.gt_joint;
    if (!j.error) {
      out << ": missing\n";
      continue;
    }
    out << " <- " << j.pred_joint << ": type " << j.error->type_error << ", axis " << j.error->axis_error
        << " rad, origin " << j.error->origin_error << " m, range " << j.error->limit_range_error << ", dir "
        << j.error->limit_direction_error << "  " << to_string(j.verdict);
    if (j.failed_by_link) out << " (failed: link placement)";
    out << '\n';
  }
  return out.str();
}

}  // namespace artkit
