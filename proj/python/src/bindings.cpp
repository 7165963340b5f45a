#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "artkit/aggregate.hpp"
#include "artkit/artlang.hpp"
#include "artkit/compiler.hpp"
#include "artkit/evaluate.hpp"
#include "artkit/kinematics.hpp"
#include "artkit/mesh_store.hpp"
#include "artkit/metrics.hpp"
#include "artkit/retrieval.hpp"
#include "artkit/urdf.hpp"

namespace py = pybind11;
using namespace artkit;

namespace {

using Point = std::array<double, 3>;

Vec3 vec(const Point& p) { return {p[0], p[1], p[2]}; }
Point arr(const Vec3& v) { return {v.x, v.y, v.z}; }

py::dict pose_dict(const Pose& p) {
  py::dict d;
  d["position"] = arr(p.position);
  d["quaternion"] = std::array<double, 4>{p.orientation.w(), p.orientation.x(), p.orientation.y(), p.orientation.z()};
  return d;
}

JointKind kind_of(const std::string& s) {
  auto k = joint_kind_from_string(s);
  if (!k) throw py::value_error("unknown joint type '" + s + "'");
  return *k;
}

WorldJoint world_joint(const py::dict& d) {
  WorldJoint w;
  w.kind = kind_of(d["type"].cast<std::string>());
  w.origin = vec(d["origin"].cast<Point>());
  w.axis = vec(d["axis"].cast<Point>());
  if (d.contains("limit")) {
    const auto lim = d["limit"].cast<std::array<double, 2>>();
    w.limit = {lim[0], lim[1]};
  }
  return w;
}

PointCloud cloud(const std::vector<Point>& pts) {
  PointCloud c;
  c.points.reserve(pts.size());
  for (const auto& p : pts) c.points.push_back(vec(p));
  return c;
}

EvalConfig eval_config(double position, double angular, std::size_t samples) {
  EvalConfig cfg;
  cfg.position_threshold = position;
  cfg.angular_threshold = angular;
  cfg.chamfer_samples = samples;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_artkit, m) {
  m.doc() = "Articulated-object kinematics, URDF, ArtLang compiler and evaluation";

  py::register_exception<UrdfError>(m, "UrdfError", PyExc_ValueError);
  py::register_exception<ArtlangError>(m, "ArtlangError", PyExc_ValueError);
  py::register_exception<CompileError>(m, "CompileError", PyExc_ValueError);
  py::register_exception<KinematicsError>(m, "KinematicsError", PyExc_ValueError);
  py::register_exception<EvalError>(m, "EvalError", PyExc_ValueError);
  py::register_exception<RetrievalError>(m, "RetrievalError", PyExc_ValueError);

  py::class_<UrdfModel>(m, "Model")
      .def_readonly("name", &UrdfModel::name)
      .def_property_readonly("links",
                             [](const UrdfModel& mdl) {
                               std::vector<std::string> out;
                               for (const auto& l : mdl.links) out.push_back(l.name);
                               return out;
                             })
      .def_property_readonly("joints",
                             [](const UrdfModel& mdl) {
                               py::list out;
                               for (const auto& j : mdl.joints) {
                                 py::dict d;
                                 d["name"] = j.name;
                                 d["type"] = to_string(j.kind);
                                 d["parent"] = j.parent;
                                 d["child"] = j.child;
                                 d["origin"] = pose_dict(j.origin);
                                 d["axis"] = arr(j.axis);
                                 if (j.limit) d["limit"] = std::array<double, 2>{j.limit->lower, j.limit->upper};
                                 out.append(d);
                               }
                               return out;
                             })
      .def_property_readonly("root", [](const UrdfModel& mdl) { return mdl.root(); })
      .def("to_urdf", &emit_urdf)
      .def("forward_kinematics",
           [](const UrdfModel& mdl, const std::map<std::string, double>& q) {
             const JointValues values(q.begin(), q.end());
             py::dict out;
             for (const auto& [name, pose] : forward_kinematics(mdl, values)) out[py::str(name)] = pose_dict(pose);
             return out;
           },
           py::arg("joint_values") = std::map<std::string, double>{})
      .def("__eq__", [](const UrdfModel& a, const UrdfModel& b) { return structurally_equal(a, b); });

  m.def("parse_urdf", &parse_urdf, py::arg("text"), py::arg("base_dir") = std::filesystem::path{});
  m.def("load_urdf", &load_urdf, py::arg("path"));

  m.def("format_artlang", [](const std::string& src) { return pretty_print(parse_artlang(src)); }, py::arg("source"),
        "Parse an ArtLang program and return its canonical text.");
  m.def(
      "compile_artlang",
      [](const std::string& src, const std::vector<std::filesystem::path>& search_dirs, const std::string& name) {
        CompileOptions o;
        o.search_dirs = search_dirs;
        o.model_name = name;
        return compile(parse_artlang(src), o).model;
      },
      py::arg("source"), py::arg("search_dirs") = std::vector<std::filesystem::path>{}, py::arg("name") = "model");

  m.def(
      "joint_error",
      [](const py::dict& pred, const py::dict& gt, double position, double angular) {
        const JointError e = joint_error(world_joint(pred), world_joint(gt), eval_config(position, angular, 1));
        py::dict d;
        d["type"] = e.type_error;
        d["axis"] = e.axis_error;
        d["origin"] = e.origin_error;
        d["limit_range"] = e.limit_range_error;
        d["limit_direction"] = e.limit_direction_error;
        d["verdict"] = to_string(e.verdict);
        return d;
      },
      py::arg("pred"), py::arg("gt"), py::arg("position_threshold") = 0.05, py::arg("angular_threshold") = 0.25,
      "Joints are dicts with type, origin, axis and an optional [lower, upper] limit, all in world coordinates.");

  m.def(
      "evaluate",
      [](const UrdfModel& pred, const UrdfModel& gt, const std::string& match, double position, double angular,
         std::size_t samples) {
        const EvalConfig cfg = eval_config(position, angular, samples);
        MeshCache cache;
        LinkMatching matching;
        if (match == "name") matching = match_by_name(pred, gt);
        else if (match == "chamfer") matching = match_by_chamfer(pred, gt, cfg, cache);
        else throw py::value_error("match must be 'name' or 'chamfer'");
        return report_to_json(evaluate(pred, gt, matching, cfg, cache));
      },
      py::arg("pred"), py::arg("gt"), py::arg("match") = "name", py::arg("position_threshold") = 0.05,
      py::arg("angular_threshold") = 0.25, py::arg("chamfer_samples") = 2048,
      "Returns the evaluation report as a JSON string.");

  m.def(
      "aggregate",
      [](const std::vector<std::string>& reports) {
        std::vector<EvalReport> parsed;
        for (const auto& r : reports) parsed.push_back(report_from_json(r));
        return stats_to_json(aggregate(parsed));
      },
      py::arg("reports"), "Folds report JSON strings into summary statistics (JSON).");

  m.def(
      "wald_rate",
      [](std::size_t successes, std::size_t total) {
        const Rate r = wald_rate(successes, total);
        return std::pair{r.rate, r.half_width};
      },
      py::arg("successes"), py::arg("total"));

  m.def("chamfer", [](const std::vector<Point>& a, const std::vector<Point>& b) { return chamfer(cloud(a), cloud(b)); },
        py::arg("a"), py::arg("b"));

  m.def(
      "tournament_select",
      [](const std::vector<std::string>& candidates, std::size_t batch,
         const std::function<std::string(std::vector<std::string>)>& selector) {
        const auto r = tournament_select(
            candidates, batch, [&](std::span<const std::string> b) {
              py::gil_scoped_acquire gil;
              return selector(std::vector<std::string>(b.begin(), b.end()));
            });
        return std::pair{r.winner, r.selector_calls};
      },
      py::arg("candidates"), py::arg("batch_size"), py::arg("selector"),
      "Returns (winner, selector_calls). `selector` receives a list and returns one of its items.");
}
