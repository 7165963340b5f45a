// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "artkit/aggregate.hpp"
#include "artkit/artlang.hpp"
#include "artkit/compiler.hpp"
#include "artkit/evaluate.hpp"
#include "artkit/kinematics.hpp"
#include "artkit/mesh_store.hpp"
#include "artkit/metrics.hpp"
#include "artkit/obj.hpp"
#include "artkit/retrieval.hpp"
#include "artkit/urdf.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace artkit;
namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kFix = ARTKIT_FIXTURES_DIR;
const fs::path kLib = ARTKIT_LIBRARY_DIR;
const std::string kCli = ARTKIT_CLI_PATH;

// Collects the reasons a criterion failed; an empty list means pass.
struct Outcome {
  std::vector<std::string> problems;
  std::string summary;
  void fail(const std::string& why) {
    if (problems.size() < 5) problems.push_back(why);
    else if (problems.size() == 5) problems.push_back("...");
  }
  bool ok() const { return problems.empty(); }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("artkit_accept_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

WorldJoint wj(JointKind k, Vec3 origin, Vec3 axis, double lo, double hi) {
  WorldJoint w;
  w.kind = k;
  w.origin = origin;
  w.axis = axis;
  w.limit = {lo, hi};
  return w;
}

// ---- 1 ----

Outcome joint_formulas() {
  Outcome o;
  std::mt19937_64 rng(1001);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<std::pair<WorldJoint, WorldJoint>> pairs;
  for (int i = 0; i < 1000; ++i) {
    const JointKind kp = (i % 4 == 0) ? JointKind::prismatic : JointKind::revolute;
    const JointKind kg = (i % 7 == 0) ? JointKind::revolute : ((i % 2) ? JointKind::prismatic : JointKind::revolute);
    Vec3 ap{u(rng), u(rng), u(rng)}, ag{u(rng), u(rng), u(rng)};
    if (i % 10 == 3) ag = ap * -1.0;                          // exactly antiparallel
    if (i % 10 == 5) ag = (ap + Vec3{1e-4, 0, 0} * u(rng));  // nearly parallel
    pairs.push_back({wj(kp, {u(rng), u(rng), u(rng)}, ap.normalized(), u(rng) - 1, u(rng) + 1),
                     wj(kg, {u(rng), u(rng), u(rng)}, ag.normalized(), u(rng) - 1, u(rng) + 1)});
  }
  const auto t0 = Clock::now();
  std::vector<JointError> errs;
  for (const auto& [p, g] : pairs) errs.push_back(joint_error(p, g));
  const double lib_time = seconds_since(t0);

  double worst = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [p, g] = pairs[i];
    const JointError& e = errs[i];
    const double type = p.kind == g.kind ? 0 : 1;
    const double axis = oracle::line_angle(p.axis, g.axis);
    const double origin = g.kind == JointKind::revolute ? oracle::line_distance(p.origin, p.axis, g.origin, g.axis)
                                                        : (p.origin - g.origin).norm();
    const Vec3 mp = p.axis * (p.limit.upper - p.limit.lower), mg = g.axis * (g.limit.upper - g.limit.lower);
    const double range = (mp - mg).norm();
    const double direction = 1 - std::cos(oracle::angle_by_rotation(mp, mg));
    const double d[5] = {std::abs(e.type_error - type), std::abs(e.axis_error - axis),
                         std::abs(e.origin_error - origin), std::abs(e.limit_range_error - range),
                         std::abs(e.limit_direction_error - direction)};
    for (int c = 0; c < 5; ++c) {
      worst = std::max(worst, d[c]);
      if (!(d[c] <= 1e-7)) {
        static const char* names[] = {"type", "axis", "origin", "limit range", "limit direction"};
        o.fail("pair " + std::to_string(i) + " " + names[c] + " off by " + num(d[c]));
      }
    }
  }
  const double total = seconds_since(t0);
  if (!(lib_time < 10.0)) o.fail("library time " + num(lib_time) + " s");
  o.summary = "1000 pairs, max deviation " + num(worst) + ", library " + std::to_string(lib_time) + " s, with oracle " +
              std::to_string(total) + " s";
  return o;
}

// ---- 2 ----

Outcome thresholds() {
  Outcome o;
  const EvalConfig cfg;  // 50 mm, 0.25 rad
  const double pos = cfg.position_threshold, ang = cfg.angular_threshold;
  const double above_pos = std::nextafter(pos, 1.0);
  const Vec3 z{0, 0, 1};
  struct Fixture {
    std::string name;
    bool expect;
    std::function<bool()> success;
  };
  auto rot = [&](double a) { return Pose::rotation(UnitQuat::from_axis_angle(z, a)); };
  auto prism = [&](Vec3 origin, Vec3 axis, double hi) { return wj(JointKind::prismatic, origin, axis, 0, hi); };
  // Small range so a tilted axis does not also trip the limit terms.
  auto rev = [&](Vec3 origin, Vec3 axis) { return wj(JointKind::revolute, origin, axis, 0, 0.01); };
  auto tilted = [&](double a) { return Vec3{std::sin(a), 0, std::cos(a)}; };
  const std::vector<Fixture> fixtures{
      {"link position exactly 50 mm", true, [&] { return link_error(Pose::translation({pos, 0, 0}), Pose{}, cfg).success; }},
      {"link position one ulp over 50 mm", false,
       [&] { return link_error(Pose::translation({0, above_pos, 0}), Pose{}, cfg).success; }},
      {"link orientation just under 0.25 rad", true, [&] { return link_error(rot(ang - 1e-9), Pose{}, cfg).success; }},
      {"link orientation just over 0.25 rad", false, [&] { return link_error(rot(ang + 1e-9), Pose{}, cfg).success; }},
      {"prismatic origin exactly 50 mm", true,
       [&] { return joint_error(prism({0, 0, pos}, z, 0.3), prism({}, z, 0.3), cfg).verdict == JointVerdict::success; }},
      {"prismatic origin one ulp over 50 mm", false,
       [&] {
         return joint_error(prism({0, 0, above_pos}, z, 0.3), prism({}, z, 0.3), cfg).verdict == JointVerdict::success;
       }},
      {"revolute line distance just under 50 mm", true,
       [&] {
         return joint_error(rev({pos - 1e-9, 0, 0.7}, z), rev({}, z), cfg).verdict == JointVerdict::success;
       }},
      {"revolute line distance just over 50 mm", false,
       [&] {
         return joint_error(rev({pos + 1e-9, 0, 0.7}, z), rev({}, z), cfg).verdict == JointVerdict::success;
       }},
      {"axis angle just under 0.25 rad", true,
       [&] { return joint_error(rev({}, tilted(ang - 1e-9)), rev({}, z), cfg).verdict == JointVerdict::success; }},
      {"axis angle just over 0.25 rad", false,
       [&] { return joint_error(rev({}, tilted(ang + 1e-9)), rev({}, z), cfg).verdict == JointVerdict::success; }},
      {"limit range just under 50 mm", true,
       [&] {
         return joint_error(prism({}, z, 0.35 - 1e-9), prism({}, z, 0.3), cfg).verdict == JointVerdict::success;
       }},
      {"limit range just over 50 mm", false,
       [&] {
         return joint_error(prism({}, z, 0.35 + 1e-9), prism({}, z, 0.3), cfg).verdict == JointVerdict::success;
       }},
  };
  for (const auto& f : fixtures) {
    if (f.success() != f.expect) o.fail(f.name);
  }
  o.summary = std::to_string(fixtures.size()) + " fixtures";
  return o;
}

// ---- 3 ----

Outcome attribution() {
  Outcome o;
  const EvalConfig cfg;
  const Vec3 z{0, 0, 1}, x{1, 0, 0};
  int count = 0;
  auto expect = [&](const std::string& name, JointVerdict got, JointVerdict want) {
    ++count;
    if (got != want) o.fail(name + ": got " + to_string(got) + ", want " + to_string(want));
  };
  const WorldJoint gt = wj(JointKind::revolute, {0, 0, 0}, z, 0, 1.5);
  expect("type+axis+origin+limit",
         joint_error(wj(JointKind::prismatic, {0.3, 0, 0}, x, 0, 0.2), gt, cfg).verdict, JointVerdict::fail_type);
  expect("axis+origin+limit", joint_error(wj(JointKind::revolute, {0, 0.3, 0}, x, 0, 0.2), gt, cfg).verdict,
         JointVerdict::fail_axis);
  expect("origin+limit", joint_error(wj(JointKind::revolute, {0.3, 0, 0}, z, 0, 0.2), gt, cfg).verdict,
         JointVerdict::fail_origin);
  expect("type+limit", joint_error(wj(JointKind::prismatic, {}, z, -1, 0), gt, cfg).verdict, JointVerdict::fail_type);
  expect("axis+limit (flipped, tilted)",
         joint_error(wj(JointKind::revolute, {}, Vec3{1, 0, -1}.normalized(), 0, 1.5), gt, cfg).verdict,
         JointVerdict::fail_axis);
  expect("limit only (range too short)", joint_error(wj(JointKind::revolute, {}, z, 0, 0.5), gt, cfg).verdict,
         JointVerdict::fail_limit);

  // Whole-object cases through evaluate().
  MeshCache cache;
  EvalConfig fast = cfg;
  fast.chamfer_samples = 128;
  auto failure_of = [&](const UrdfModel& pred, const UrdfModel& truth) {
    return evaluate(pred, truth, match_by_name(pred, truth), fast, cache).failure();
  };
  {
    // A door predicted as a vertical slider with its pivot off the hinge.
    const UrdfModel truth = load_urdf(kLib / "objects" / "cabinet_door" / "model.urdf");
    UrdfModel pred = truth;
    for (auto& j : pred.joints) {
      if (j.name != "joint_door") continue;
      j.kind = JointKind::prismatic;
      j.axis = {1, 0, 0};
      j.limit = JointLimit{0, 0.1};
    }
    ++count;
    const FailureKind f = failure_of(pred, truth);
    if (f != FailureKind::type) o.fail(std::string("door as slider: got ") + to_string(f));
  }
  {
    // Two joints wrong in different ways: the object reports the earlier kind.
    const UrdfModel truth = load_urdf(kLib / "objects" / "desk_lamp" / "model.urdf");
    UrdfModel pred = truth;
    for (auto& j : pred.joints) {
      if (j.name == "joint_arm") j.limit = JointLimit{-0.2, 0.2};  // limit only
      if (j.name == "joint_head") j.axis = {1, 0, 0};              // axis
    }
    ++count;
    const EvalReport r = evaluate(pred, truth, match_by_name(pred, truth), fast, cache);
    if (r.failure() != FailureKind::axis) o.fail(std::string("lamp: got ") + to_string(r.failure()));
    for (const auto& jr : r.joints) {
      const JointVerdict want = jr.gt_joint == "joint_arm" ? JointVerdict::fail_limit : JointVerdict::fail_axis;
      if (jr.verdict != want) o.fail("lamp " + jr.gt_joint + ": got " + to_string(jr.verdict));
    }
  }
  o.summary = std::to_string(count) + " fixtures";
  return o;
}

// ---- 4 ----

Outcome compile_round_trip() {
  Outcome o;
  std::mt19937_64 rng(4004);
  std::uniform_real_distribution<double> u(-1, 1);
  static const char* axes[] = {"+x", "-x", "+y", "-y", "+z", "-z"};
  CompileOptions opts;
  opts.search_dirs = {kFix / "artlang"};
  int checked = 0;
  double worst_axis = 0, worst_pivot = 0;
  auto to_mat = [](const Pose& p) {
    const UnitQuat& q = p.orientation;
    return oracle::from_quat(q.w(), q.x(), q.y(), q.z(), p.position);
  };
  while (checked < 500) {
    struct Spec {
      std::string child, parent;
      bool revolute;
      Vec3 axis, pivot;
    };
    std::vector<Spec> specs;
    for (const auto& [c, p] : {std::pair{"drawer", "body"}, std::pair{"knob", "drawer"}}) {
      Vec3 a{u(rng), u(rng), u(rng)};
      while (a.norm() < 0.1) a = {u(rng), u(rng), u(rng)};
      specs.push_back({c, p, rng() % 2 == 0, a, {u(rng), u(rng), u(rng)}});
    }
    std::string src = "part body \"meshes/body.obj\";\npart drawer \"meshes/drawer.obj\";\npart knob \"meshes/knob.obj\";\n";
    src += std::string("place drawer on body axis ") + axes[rng() % 6] + ";\n";
    src += std::string("place knob on drawer axis ") + axes[rng() % 6] + ";\n";
    for (const auto& s : specs) {
      src += "joint " + s.child + " to " + s.parent + (s.revolute ? " revolute" : " prismatic") + " axis " +
             num(s.axis.x) + " " + num(s.axis.y) + " " + num(s.axis.z);
      if (s.revolute) src += " pivot " + num(s.pivot.x) + " " + num(s.pivot.y) + " " + num(s.pivot.z);
      src += " limit -0.5 0.5;\n";
    }
    CompileResult r;
    try {
      r = compile(parse_artlang(src), opts);
    } catch (const std::exception& e) {
      o.fail(std::string("compile: ") + e.what());
      checked += 2;
      continue;
    }
    // Re-expand with independent matrices, root at the identity.
    std::map<std::string, oracle::Mat4> world{{"body", oracle::identity()}};
    for (const auto& name : {"drawer", "knob"}) {
      const Joint* j = r.model.find_joint(std::string("joint_") + name);
      if (!j) {
        o.fail(std::string("missing joint for ") + name);
        continue;
      }
      world[name] = oracle::mul(world.at(j->parent), to_mat(j->origin));
    }
    for (const auto& s : specs) {
      ++checked;
      const Joint* j = r.model.find_joint("joint_" + s.child);
      if (!j || !world.contains(s.child)) continue;
      const oracle::Mat4& m = world.at(s.child);
      const Vec3 axis = oracle::apply_dir(m, j->axis);
      const double axis_err = (axis - s.axis.normalized()).norm();
      worst_axis = std::max(worst_axis, axis_err);
      if (!(axis_err <= 1e-9)) o.fail("axis of joint_" + s.child + " off by " + num(axis_err));
      if (s.revolute) {
        const double d = oracle::point_line_distance(s.pivot, oracle::apply(m, {0, 0, 0}), axis);
        worst_pivot = std::max(worst_pivot, d);
        if (!(d <= 1e-9)) o.fail("pivot of joint_" + s.child + " off by " + num(d));
      }
    }
  }
  o.summary = std::to_string(checked) + " joints, max axis error " + num(worst_axis) + ", max pivot distance " +
              num(worst_pivot);
  return o;
}

// ---- 5 ----

Outcome placements() {
  Outcome o;
  const double band = kContactTolerance;  // 0.1 mm
  int placements = 0;
  double worst_low = 0;
  std::vector<fs::path> programs;
  for (const auto& e : fs::directory_iterator(kFix / "artlang")) {
    if (e.path().extension() == ".art") programs.push_back(e.path());
  }
  std::sort(programs.begin(), programs.end());
  CompileOptions opts;
  opts.search_dirs = {kFix / "artlang"};
  for (const auto& path : programs) {
    const std::string name = path.stem().string();
    ArtProgram prog;
    CompileResult r;
    try {
      prog = parse_artlang(slurp(path));
      r = compile(prog, opts);
    } catch (const std::exception& e) {
      o.fail(name + ": " + e.what());
      continue;
    }
    std::map<std::string, std::vector<oracle::Tri>> tris;
    std::map<std::string, TriMesh> meshes;
    for (const auto& d : prog.parts) {
      meshes[d.name] = scaled(load_obj(kFix / "artlang" / d.mesh_ref), d.scale);
      tris[d.name] = oracle::triangles_of(meshes[d.name], r.placed.at(d.name));
    }
    // No two parts of the finished assembly interpenetrate.
    for (auto a = tris.begin(); a != tris.end(); ++a) {
      for (auto b = std::next(a); b != tris.end(); ++b) {
        if (oracle::meshes_penetrate(a->second, b->second)) o.fail(name + ": " + a->first + " and " + b->first + " intersect");
      }
    }
    // Replay placements in compile order, checking each contact gap against
    // the parts that existed when it was placed.
    std::vector<PlaceStmt> order;
    std::set<std::string> done{prog.parts.front().name};
    for (const auto& s : prog.statements) {
      if (const auto* p = std::get_if<PlaceStmt>(&s)) order.push_back(*p), done.insert(p->child);
    }
    for (const auto& d : prog.parts) {
      if (done.contains(d.name)) continue;
      PlaceStmt implicit;
      implicit.child = d.name;
      implicit.parent = prog.parts.front().name;
      order.push_back(implicit);
    }
    std::vector<std::string> existing{prog.parts.front().name};
    for (const auto& stmt : order) {
      ++placements;
      const int i = axis_index(stmt.axis);
      const double s = axis_sign(stmt.axis);
      auto shifted = [&](double back) {
        Pose p = r.placed.at(stmt.child);
        Vec3 pos = p.position;
        if (i == 0) pos.x -= s * back;
        if (i == 1) pos.y -= s * back;
        if (i == 2) pos.z -= s * back;
        p.position = pos;
        return oracle::triangles_of(meshes.at(stmt.child), p);
      };
      auto touches = [&](const std::vector<oracle::Tri>& child, bool strict) {
        for (const auto& other : existing) {
          if (strict ? oracle::meshes_penetrate(child, tris.at(other)) : oracle::meshes_intersect(child, tris.at(other)))
            return true;
        }
        return false;
      };
      const std::string where = name + " " + stmt.child + " on " + stmt.parent;
      // Gap no larger than clearance + band: backing off that far reaches contact.
      if (!touches(shifted(stmt.clearance + band), false)) o.fail(where + ": gap exceeds clearance + 0.1 mm");
      // Gap no smaller than clearance - band: backing off that far stays clear.
      if (touches(shifted(stmt.clearance - band), true)) o.fail(where + ": gap below clearance - 0.1 mm");
      // Finer reading of the gap for the summary.
      double lo = 0, hi = stmt.clearance + band;
      for (int it = 0; it < 30; ++it) {
        const double mid = 0.5 * (lo + hi);
        (touches(shifted(mid), false) ? hi : lo) = mid;
      }
      worst_low = std::max(worst_low, std::abs(hi - stmt.clearance));
      existing.push_back(stmt.child);
    }
  }
  if (placements < 20) o.fail("only " + std::to_string(placements) + " placements");
  o.summary = std::to_string(placements) + " placements in " + std::to_string(programs.size()) +
              " programs, max |gap - clearance| " + num(worst_low) + " m";
  return o;
}

// ---- 6 ----

Outcome urdf_round_trip() {
  Outcome o;
  int files = 0;
  for (const auto& e : fs::directory_iterator(kFix / "urdf" / "valid")) {
    if (e.path().extension() != ".urdf") continue;
    ++files;
    const std::string name = e.path().filename().string();
    try {
      const UrdfModel a = load_urdf(e.path());
      const std::string t1 = emit_urdf(a);
      const UrdfModel b = parse_urdf(t1, e.path().parent_path());
      const std::string t2 = emit_urdf(b);
      if (!structurally_equal(a, b)) o.fail(name + ": not structurally equal after a round trip");
      if (t1 != t2) o.fail(name + ": emitted text is not a fixed point");
    } catch (const std::exception& ex) {
      o.fail(name + ": " + ex.what());
    }
  }
  if (files != 20) o.fail("expected 20 corpus files, found " + std::to_string(files));
  const std::vector<std::pair<std::string, UrdfErrc>> invalid{{"malformed_xml", UrdfErrc::malformed_xml},
                                                              {"cycle", UrdfErrc::cyclic_structure},
                                                              {"repeated_link", UrdfErrc::repeated_link},
                                                              {"two_parents", UrdfErrc::multiple_parents}};
  std::set<UrdfErrc> seen;
  for (const auto& [file, want] : invalid) {
    try {
      load_urdf(kFix / "urdf" / "invalid" / (file + ".urdf"));
      o.fail(file + ": accepted");
    } catch (const UrdfError& ex) {
      seen.insert(ex.code());
      if (ex.code() != want) o.fail(file + ": got " + to_string(ex.code()));
    }
  }
  if (seen.size() != invalid.size()) o.fail("invalid classes do not raise distinct errors");
  o.summary = std::to_string(files) + " corpus files, " + std::to_string(invalid.size()) + " invalid classes";
  return o;
}

// ---- 7 ----

Outcome chamfer_equivalence() {
  Outcome o;
  std::mt19937_64 rng(707);
  std::uniform_real_distribution<double> u(-1, 1);
  double worst = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t na = 1 + rng() % 500, nb = 1 + rng() % 500;
    PointCloud a, b;
    const double spread = t % 5 == 0 ? 1e-3 : 1.0;
    for (std::size_t i = 0; i < na; ++i) a.points.push_back(Vec3{u(rng), u(rng), u(rng)} * spread);
    for (std::size_t i = 0; i < nb; ++i) b.points.push_back(Vec3{u(rng), u(rng), u(rng)} * spread + Vec3{0.3, 0, 0});
    if (t % 7 == 0) b.points.push_back(a.points.front());  // shared point
    const double fast = chamfer(a, b);
    const double brute = oracle::chamfer(a.points, b.points);
    worst = std::max(worst, std::abs(fast - brute));
    if (!(std::abs(fast - brute) <= 1e-9)) o.fail("pair " + std::to_string(t) + " off by " + num(fast - brute));
    if (!(std::abs(chamfer(b, a) - fast) <= 1e-12)) o.fail("pair " + std::to_string(t) + " not symmetric");
    const double k = 0.1 + 3.0 * std::abs(u(rng));
    PointCloud sa = a, sb = b;
    for (auto& p : sa.points) p = p * k;
    for (auto& p : sb.points) p = p * k;
    if (!(std::abs(chamfer(sa, sb) - k * fast) <= 1e-9 * std::max(1.0, k * fast)))
      o.fail("pair " + std::to_string(t) + " does not scale linearly");
  }
  o.summary = "50 pairs, max deviation " + num(worst);
  return o;
}

// ---- 8 ----

Outcome tournament() {
  Outcome o;
  auto first = [](std::span<const std::string> batch) { return batch.front(); };
  for (std::size_t b = 2; b <= 8; ++b) {
    for (std::size_t n = 1; n <= 64; ++n) {
      std::vector<std::string> ids(n);
      for (std::size_t i = 0; i < n; ++i) ids[i] = "c" + std::to_string(i);
      const std::size_t want = (n - 1 + b - 2) / (b - 1);
      const auto r = tournament_select(ids, b, first);
      if (r.selector_calls != want) {
        o.fail("n=" + std::to_string(n) + " b=" + std::to_string(b) + ": " + std::to_string(r.selector_calls) +
               " calls, want " + std::to_string(want));
      }
    }
  }
  std::mt19937_64 rng(808);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng() % 64;
    std::vector<std::string> ids(n);
    std::vector<double> score(n);
    for (std::size_t i = 0; i < n; ++i) {
      ids[i] = std::to_string(i);
      score[i] = std::uniform_real_distribution<double>(0, 1)(rng);
    }
    const std::size_t best = std::max_element(score.begin(), score.end()) - score.begin();
    std::shuffle(ids.begin(), ids.end(), rng);
    const auto pick = [&](std::span<const std::string> batch) {
      return *std::max_element(batch.begin(), batch.end(), [&](const std::string& a, const std::string& b) {
        return score[std::stoul(a)] < score[std::stoul(b)];
      });
    };
    const std::size_t b = 2 + rng() % 7;
    const auto r = tournament_select(ids, b, pick, 1 + rng() % 4);
    if (r.winner != std::to_string(best)) o.fail("trial " + std::to_string(t) + ": wrong winner");
  }
  o.summary = "448 count cases, 200 argmax trials";
  return o;
}

// ---- 9 ----

Outcome end_to_end() {
  Outcome o;
  const auto t0 = Clock::now();
  const fs::path root = scratch("e2e");
  fs::create_directories(root);
  const std::vector<std::string> objects{"cabinet_drawer", "cabinet_door", "lidded_box", "desk_lamp",
                                         "drawer_with_handle"};
  auto run = [&](const std::string& object, const std::string& config, const fs::path& out) {
    const std::string args = "run --modality video --input \"" + (kLib / "frames" / object).string() +
                             "\" --library \"" + (kLib / "manifest.json").string() + "\" --config \"" +
                             (kLib / "configs" / (config + ".json")).string() + "\" -o \"" + out.string() + "\"";
    return run_cli(args, out.string() + ".log");
  };
  int passed = 0;
  for (const auto& object : objects) {
    const fs::path out = root / object;
    if (int rc = run(object, object, out); rc != 0) {
      o.fail(object + ": run exited " + std::to_string(rc));
      continue;
    }
    const fs::path gt = kLib / "objects" / object / "model.urdf";
    const std::string args = "eval \"" + (out / "model.urdf").string() + "\" \"" + gt.string() +
                             "\" --require-success --format structured -o \"" + (root / (object + "_eval.json")).string() + "\"";
    if (int rc = run_cli(args, root / (object + "_eval.log")); rc != 0) {
      o.fail(object + ": eval exited " + std::to_string(rc));
      continue;
    }
    const EvalReport r = report_from_json(slurp(root / (object + "_eval.json")));
    if (!r.object_link_success || !r.object_joint_success) o.fail(object + ": report is not a success");
    else ++passed;
  }

  // The correction script starts wrong and must get better.
  std::string ratings;
  const fs::path corr = root / "correction";
  if (int rc = run("cabinet_drawer", "cabinet_drawer_correction", corr); rc != 0) {
    o.fail("correction run exited " + std::to_string(rc));
  } else {
    for (const char* loop : {"link_loop", "joint_loop"}) {
      const json log = json::parse(slurp(corr / "logs" / (std::string(loop) + ".json")));
      std::vector<int> rs;
      for (const auto& it : log["iterations"]) {
        if (it.contains("feedback") && it["feedback"].is_object()) rs.push_back(it["feedback"]["realism_rating"]);
      }
      std::string seq;
      for (int x : rs) seq += (seq.empty() ? "" : "->") + std::to_string(x);
      ratings += std::string(ratings.empty() ? "" : ", ") + loop + " " + seq;
      if (rs.size() < 2) o.fail(std::string(loop) + ": no correction happened");
      else if (!(rs.back() > rs.front())) o.fail(std::string(loop) + ": rating did not improve");
    }
    const std::string args = "eval \"" + (corr / "model.urdf").string() + "\" \"" +
                             (kLib / "objects" / "cabinet_drawer" / "model.urdf").string() + "\" --require-success";
    if (run_cli(args, root / "correction_eval.log") != 0) o.fail("corrected model does not pass eval");
  }
  const double elapsed = seconds_since(t0);
  if (!(elapsed < 120.0)) o.fail("took " + std::to_string(elapsed) + " s");
  o.summary = std::to_string(passed) + "/5 fixtures pass eval, correction ratings " + ratings + ", " +
              std::to_string(elapsed) + " s";
  return o;
}

// ---- 10 ----

EvalReport synthetic_report(int index, FailureKind kind) {
  EvalReport r;
  r.object_id = "obj_" + std::to_string(index);
  LinkResult base{"base", "base", LinkError{0, 0, true}, 0.0, true};
  LinkResult part{"part", "part", LinkError{0.01, 0.02, true}, 0.001, true};
  JointResult j;
  j.gt_joint = "joint_part";
  j.gt_child = "part";
  j.pred_joint = "joint_part";
  j.error = JointError{};
  j.verdict = JointVerdict::success;
  j.success = true;
  switch (kind) {
    case FailureKind::invalid:
      r.invalid = true;
      r.invalid_reason = "syntax";
      part = {"part", "", std::nullopt, std::nullopt, false};
      j = {"joint_part", "part", "", std::nullopt, JointVerdict::missing, false, false};
      break;
    case FailureKind::link:
      part.error = LinkError{0.2, 0.0, false};
      part.success = false;
      j.failed_by_link = true;
      j.success = false;
      break;
    case FailureKind::type: j.verdict = JointVerdict::fail_type; break;
    case FailureKind::axis: j.verdict = JointVerdict::fail_axis; break;
    case FailureKind::origin: j.verdict = JointVerdict::fail_origin; break;
    case FailureKind::limit: j.verdict = JointVerdict::fail_limit; break;
    default: break;
  }
  if (j.verdict != JointVerdict::success) j.success = false;
  if (j.verdict == JointVerdict::fail_type) j.error->type_error = 1;
  r.links = {base, part};
  r.joints = {j};
  r.object_link_success = base.success && part.success && !r.invalid;
  r.object_joint_success = r.object_link_success && j.success;
  return r;
}

Outcome aggregation() {
  Outcome o;
  const fs::path dir = scratch("reports");
  fs::create_directories(dir);
  const std::vector<std::pair<FailureKind, int>> mix{{FailureKind::none, 75}, {FailureKind::invalid, 5},
                                                     {FailureKind::link, 5},  {FailureKind::type, 6},
                                                     {FailureKind::axis, 4},  {FailureKind::origin, 3},
                                                     {FailureKind::limit, 2}};
  int idx = 0;
  for (const auto& [kind, n] : mix) {
    for (int k = 0; k < n; ++k, ++idx) {
      std::ofstream(dir / ("report_" + std::to_string(idx) + ".json")) << report_to_json(synthetic_report(idx, kind));
    }
  }
  const fs::path out = scratch("aggregate.json");
  const fs::path text = scratch("aggregate.txt");
  if (run_cli("report \"" + dir.string() + "\" --format structured -o \"" + out.string() + "\"", out.string() + ".log") != 0 ||
      run_cli("report \"" + dir.string() + "\" -o \"" + text.string() + "\"", text.string() + ".log") != 0) {
    o.fail("report exited non-zero");
    return o;
  }
  const json s = json::parse(slurp(out));
  // Hand computation.
  const double joint_hw = 1.96 * std::sqrt(0.75 * 0.25 / 100.0);
  const double link_hw = 1.96 * std::sqrt(0.90 * 0.10 / 100.0);
  if (s["objects"] != 100) o.fail("object count");
  if (s["joint_success"]["successes"] != 75 || s["joint_success"]["rate"] != 0.75) o.fail("joint success rate");
  if (s["link_success"]["successes"] != 90 || s["link_success"]["rate"] != 0.90) o.fail("link success rate");
  if (std::abs(s["joint_success"]["ci95_half_width"].get<double>() - joint_hw) > 1e-15) o.fail("joint CI");
  if (std::abs(s["link_success"]["ci95_half_width"].get<double>() - link_hw) > 1e-15) o.fail("link CI");
  const std::string t = slurp(text);
  if (t.find("joint success: 75.00% +/- 8.49% (75/100)") == std::string::npos) o.fail("text joint line");
  if (t.find("link success: 90.00% +/- 5.88% (90/100)") == std::string::npos) o.fail("text link line");
  for (const auto& [kind, n] : mix) {
    if (kind == FailureKind::none) continue;
    const std::string key = to_string(kind);
    if (!s["failure_percent"].contains(key) || s["failure_percent"][key] != static_cast<double>(n)) {
      o.fail("failure percent for " + key);
    }
    if (!s["failure_counts"].contains(key) || s["failure_counts"][key] != n) o.fail("failure count for " + key);
  }
  o.summary = "100 reports, joint 75/100 +/- " + num(100 * joint_hw).substr(0, 6) + "%";
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "joint error formulas match numeric oracles", joint_formulas},
      {2, "success flips exactly at the thresholds", thresholds},
      {3, "failure attribution follows type, axis, origin, limit", attribution},
      {4, "compiled joints reproduce global axes and pivots", compile_round_trip},
      {5, "placements do not intersect and sit at the requested clearance", placements},
      {6, "URDF round trip and invalid-document errors", urdf_round_trip},
      {7, "chamfer matches brute force", chamfer_equivalence},
      {8, "tournament call counts and argmax", tournament},
      {9, "hermetic end-to-end runs", end_to_end},
      {10, "report aggregation", aggregation},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    const double dt = seconds_since(t0);
    failed += !o.ok();
    std::printf("[%s] criterion %2d: %s (%s; %.2f s)\n", o.ok() ? "PASS" : "FAIL", c.id, c.name, o.summary.c_str(), dt);
    for (const auto& p : o.problems) std::printf("         - %s\n", p.c_str());
    std::fflush(stdout);
  }
  std::error_code ec;
  fs::remove_all(fs::temp_directory_path() / ("artkit_accept_" + std::to_string(::getpid())), ec);
  return failed == 0 ? 0 : 1;
}
