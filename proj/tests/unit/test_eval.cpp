#include <filesystem>
#include <random>

#include "artkit/aggregate.hpp"
#include "artkit/evaluate.hpp"
#include "artkit/kinematics.hpp"
#include "artkit/mesh_store.hpp"
#include "artkit/metrics.hpp"
#include "artkit/urdf.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace artkit;
namespace fs = std::filesystem;

namespace {

const fs::path kLib = ARTKIT_LIBRARY_DIR;

UrdfModel gt(const std::string& id) { return load_urdf(kLib / "objects" / id / "model.urdf"); }

WorldJoint wj(JointKind k, Vec3 origin, Vec3 axis, double lo, double hi) {
  WorldJoint w;
  w.kind = k;
  w.origin = origin;
  w.axis = axis;
  w.limit = {lo, hi};
  return w;
}

EvalConfig fast() {
  EvalConfig c;
  c.chamfer_samples = 256;
  return c;
}

}  // namespace

TEST_CASE("link error thresholds are inclusive") {
  const EvalConfig cfg;
  CHECK(link_error(Pose::translation({0.05, 0, 0}), Pose{}, cfg).success);
  CHECK_FALSE(link_error(Pose::translation({0.0501, 0, 0}), Pose{}, cfg).success);
  const LinkError e = link_error(Pose::rotation(UnitQuat::from_axis_angle({0, 0, 1}, 0.3)), Pose{}, cfg);
  CHECK(e.orientation_error == doctest::Approx(0.3));
  CHECK_FALSE(e.success);
}

TEST_CASE("joint components against numeric oracles") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 200; ++i) {
    const JointKind kp = i % 3 == 0 ? JointKind::prismatic : JointKind::revolute;
    const JointKind kg = i % 5 == 0 ? JointKind::prismatic : JointKind::revolute;
    const WorldJoint p = wj(kp, {u(rng), u(rng), u(rng)}, Vec3{u(rng), u(rng), u(rng)}.normalized(), u(rng) - 1, u(rng) + 1);
    const WorldJoint g = wj(kg, {u(rng), u(rng), u(rng)}, Vec3{u(rng), u(rng), u(rng)}.normalized(), u(rng) - 1, u(rng) + 1);
    const JointError e = joint_error(p, g);
    CHECK(e.type_error == (kp != kg ? 1 : 0));
    CHECK(std::abs(e.axis_error - oracle::line_angle(p.axis, g.axis)) <= 1e-7);
    const double origin = kg == JointKind::revolute ? oracle::line_distance(p.origin, p.axis, g.origin, g.axis)
                                                    : (p.origin - g.origin).norm();
    CHECK(std::abs(e.origin_error - origin) <= 1e-7);
    const Vec3 mp = p.axis * (p.limit.upper - p.limit.lower), mg = g.axis * (g.limit.upper - g.limit.lower);
    CHECK(std::abs(e.limit_range_error - (mp - mg).norm()) <= 1e-7);
    CHECK(std::abs(e.limit_direction_error - (1 - std::cos(oracle::angle_by_rotation(mp, mg)))) <= 1e-7);
  }
}

TEST_CASE("joint special cases") {
  // Parallel revolute axes fall back to point-to-line distance.
  JointError e = joint_error(wj(JointKind::revolute, {0, 0.03, 0}, {0, 0, 1}, 0, 1),
                             wj(JointKind::revolute, {0, 0, 5}, {0, 0, -1}, 0, 1));
  CHECK(e.axis_error == 0.0);
  CHECK(e.origin_error == doctest::Approx(0.03));
  // Flipped axis: same line, opposite motion direction.
  CHECK(e.limit_direction_error == doctest::Approx(2.0));
  CHECK(e.verdict == JointVerdict::fail_limit);

  // Zero ranges.
  e = joint_error(wj(JointKind::prismatic, {}, {1, 0, 0}, 0, 0), wj(JointKind::prismatic, {}, {1, 0, 0}, 0.2, 0.2));
  CHECK(e.limit_direction_error == 0.0);
  CHECK(e.limit_range_error == 0.0);
  e = joint_error(wj(JointKind::prismatic, {}, {1, 0, 0}, 0, 0), wj(JointKind::prismatic, {}, {1, 0, 0}, 0, 0.3));
  CHECK(e.limit_direction_error == 2.0);
  CHECK(e.limit_range_error == doctest::Approx(0.3));

  // Fixed against fixed compares only the type.
  e = joint_error(wj(JointKind::fixed, {1, 1, 1}, {1, 0, 0}, 0, 0), wj(JointKind::fixed, {}, {0, 1, 0}, 0, 0));
  CHECK(e.verdict == JointVerdict::success);
  CHECK(e.origin_error == 0.0);
}

TEST_CASE("chamfer agrees with brute force") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int t = 0; t < 20; ++t) {
    PointCloud a, b;
    for (int i = 0; i < 50 + t * 10; ++i) a.points.push_back({u(rng), u(rng), u(rng)});
    for (int i = 0; i < 30 + t * 7; ++i) b.points.push_back({u(rng), u(rng) * 2, u(rng)});
    CHECK(std::abs(chamfer(a, b) - oracle::chamfer(a.points, b.points)) <= 1e-12);
  }
  PointCloud one{{Vec3{0, 0, 0}}};
  CHECK(chamfer(one, one) == 0.0);
  CHECK_THROWS(chamfer(PointCloud{}, one));
}

TEST_CASE("kd tree nearest distance") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Vec3> pts;
  for (int i = 0; i < 300; ++i) pts.push_back({u(rng), u(rng), u(rng)});
  pts.push_back(pts[5]);  // duplicates are fine
  const KdTree tree(pts);
  for (int i = 0; i < 200; ++i) {
    const Vec3 q{u(rng), u(rng), u(rng)};
    double best = 1e300;
    for (const auto& p : pts) best = std::min(best, (p - q).norm());
    CHECK(tree.nearest_distance(q) == best);
  }
}

TEST_CASE("identical models succeed") {
  MeshCache cache;
  for (const char* id : {"cabinet_drawer", "cabinet_door", "lidded_box", "desk_lamp", "drawer_with_handle"}) {
    CAPTURE(id);
    const UrdfModel m = gt(id);
    const EvalReport r = evaluate(m, m, match_by_name(m, m), fast(), cache);
    CHECK(r.object_link_success);
    CHECK(r.object_joint_success);
    CHECK(r.failure() == FailureKind::none);
    CHECK(r.mesh_loss == 0.0);
  }
}

TEST_CASE("only movable ground-truth joints are scored") {
  MeshCache cache;
  const UrdfModel m = gt("drawer_with_handle");
  const EvalReport r = evaluate(m, m, match_by_name(m, m), fast(), cache);
  REQUIRE(r.joints.size() == 1);
  CHECK(r.joints[0].gt_joint == "joint_drawer");
  CHECK(r.links.size() == 3);
}

TEST_CASE("a failed link fails every joint") {
  MeshCache cache;
  const UrdfModel g = gt("desk_lamp");
  UrdfModel p = g;
  for (auto& j : p.joints) {
    if (j.child == "arm") j.origin.position.x += 0.2;  // moves arm and head
  }
  const EvalReport r = evaluate(p, g, match_by_name(p, g), fast(), cache);
  CHECK_FALSE(r.object_link_success);
  CHECK_FALSE(r.object_joint_success);
  CHECK(r.failure() == FailureKind::link);
  for (const auto& j : r.joints) {
    CHECK(j.failed_by_link);
    CHECK_FALSE(j.success);
  }
}

TEST_CASE("missing and mistyped joints") {
  MeshCache cache;
  const UrdfModel g = gt("cabinet_drawer");
  UrdfModel p = g;
  p.joints[0].kind = JointKind::revolute;
  EvalReport r = evaluate(p, g, match_by_name(p, g), fast(), cache);
  CHECK(r.object_link_success);
  CHECK(r.joints[0].verdict == JointVerdict::fail_type);
  CHECK(r.failure() == FailureKind::type);

  p = g;
  p.joints[0].kind = JointKind::fixed;
  p.joints[0].limit.reset();
  r = evaluate(p, g, match_by_name(p, g), fast(), cache);
  CHECK(r.joints[0].verdict == JointVerdict::fail_type);

  p = g;
  p.joints[0].axis = {0, 0, 1};
  r = evaluate(p, g, match_by_name(p, g), fast(), cache);
  CHECK(r.failure() == FailureKind::axis);
}

TEST_CASE("matching validation") {
  MeshCache cache;
  const UrdfModel g = gt("cabinet_drawer");
  CHECK_THROWS_AS(evaluate(g, g, {{"body", "nope"}}, fast(), cache), EvalError);
  CHECK_THROWS_AS(evaluate(g, g, {{"body", "body"}, {"drawer", "body"}}, fast(), cache), EvalError);
  // An unmatched ground-truth link fails.
  const EvalReport r = evaluate(g, g, {{"body", "body"}}, fast(), cache);
  CHECK_FALSE(r.object_link_success);
}

TEST_CASE("chamfer matching recovers renamed links") {
  MeshCache cache;
  const UrdfModel g = gt("desk_lamp");
  UrdfModel p = g;
  const std::map<std::string, std::string> rename{{"base", "p0"}, {"arm", "p1"}, {"head", "p2"}};
  for (auto& l : p.links) l.name = rename.at(l.name);
  for (auto& j : p.joints) {
    j.parent = rename.at(j.parent);
    j.child = rename.at(j.child);
  }
  const LinkMatching m = match_by_chamfer(p, g, fast(), cache);
  CHECK(m.at("p0") == "base");
  CHECK(m.at("p1") == "arm");
  CHECK(m.at("p2") == "head");
  CHECK(evaluate(p, g, m, fast(), cache).object_joint_success);
}

TEST_CASE("centroid pose mode") {
  MeshCache cache;
  const UrdfModel g = gt("cabinet_door");
  UrdfModel p = g;
  // Move the door frame to its center while keeping the geometry in place.
  Link& door = p.links[1];
  p.joints[0].origin.position = p.joints[0].origin.position + door.visual_origin.position;
  door.visual_origin.position = {};
  EvalOptions centroid;
  centroid.pose_mode = LinkPoseMode::centroid;
  CHECK(evaluate(p, g, match_by_name(p, g), fast(), cache, centroid).object_link_success);
  // Frame mode sees the 0.25 m frame shift.
  CHECK_FALSE(evaluate(p, g, match_by_name(p, g), fast(), cache).object_link_success);
}

TEST_CASE("report serialization") {
  MeshCache cache;
  const UrdfModel g = gt("lidded_box");
  UrdfModel p = g;
  p.joints[0].limit->upper = 1.0;
  EvalReport r = evaluate(p, g, match_by_name(p, g), fast(), cache);
  r.object_id = "lidded_box";
  CHECK(r.failure() == FailureKind::limit);
  const EvalReport back = report_from_json(report_to_json(r));
  CHECK(report_to_json(back) == report_to_json(r));
  CHECK(back.failure() == FailureKind::limit);
  const std::string csv = report_to_csv(r);
  CHECK(csv.rfind("object_id,kind,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 + 1);
  CHECK(report_to_text(r).find("lidded_box") != std::string::npos);

  const EvalReport inv = invalid_report("x", "did not parse", g);
  CHECK(inv.failure() == FailureKind::invalid);
  CHECK(report_from_json(report_to_json(inv)).invalid_reason == "did not parse");
  CHECK_THROWS_AS(report_from_json("{\"schema\":\"other\"}"), EvalError);
}

TEST_CASE("wald interval") {
  const Rate r = wald_rate(75, 100);
  CHECK(r.rate == 0.75);
  CHECK(r.half_width == doctest::Approx(1.96 * std::sqrt(0.75 * 0.25 / 100)).epsilon(1e-15));
  CHECK(std::round(r.half_width * 10000) / 100 == 8.49);
  CHECK(wald_rate(0, 10).half_width == 0.0);
  CHECK(wald_rate(10, 10).half_width == 0.0);
  CHECK(wald_rate(0, 0).half_width == 0.0);
}

TEST_CASE("aggregate counts failures over all objects") {
  MeshCache cache;
  const UrdfModel g = gt("cabinet_drawer");
  std::vector<EvalReport> reports;
  for (int i = 0; i < 3; ++i) reports.push_back(evaluate(g, g, match_by_name(g, g), fast(), cache));
  UrdfModel p = g;
  p.joints[0].axis = {0, 1, 0};
  reports.push_back(evaluate(p, g, match_by_name(p, g), fast(), cache));
  reports.push_back(invalid_report("bad", "x", g));
  const AggregateStats s = aggregate(reports);
  CHECK(s.objects == 5);
  CHECK(s.link_success.successes == 4);
  CHECK(s.joint_success.successes == 3);
  CHECK(s.failure_counts.at("axis") == 1);
  CHECK(s.failure_counts.at("invalid") == 1);
  CHECK(s.failure_percent.at("axis") == 20.0);
  CHECK_FALSE(s.failure_percent.count("type"));
  CHECK(s.axis_error.count == 4);
  CHECK(s.axis_error.mean == doctest::Approx(M_PI / 8));
  CHECK(s.axis_error.sd == doctest::Approx(std::sqrt(3.0) * M_PI / 8));
  CHECK_THROWS_AS(aggregate({}), EvalError);
  CHECK(stats_to_json(s).find("artkit.aggregate/1") != std::string::npos);
}

TEST_CASE("critic agreement") {
  const ConfusionMatrix c = critic_agreement({true, true, false, false, true}, {true, false, false, true, true});
  CHECK(c.tp == 2);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);
  CHECK(c.accuracy == doctest::Approx(0.6));
  CHECK_THROWS_AS(critic_agreement({true}, {}), EvalError);
}
