#include "artkit/urdf.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace artkit {

namespace pt = boost::property_tree;

const char* to_string(UrdfErrc code) {
  switch (code) {
    case UrdfErrc::malformed_xml: return "malformed_xml";
    case UrdfErrc::invalid_value: return "invalid_value";
    case UrdfErrc::empty_model: return "empty_model";
    case UrdfErrc::unknown_joint_type: return "unknown_joint_type";
    case UrdfErrc::missing_limit: return "missing_limit";
    case UrdfErrc::invalid_axis: return "invalid_axis";
    case UrdfErrc::repeated_link: return "repeated_link";
    case UrdfErrc::repeated_joint: return "repeated_joint";
    case UrdfErrc::dangling_reference: return "dangling_reference";
    case UrdfErrc::cyclic_structure: return "cyclic_structure";
    case UrdfErrc::multiple_parents: return "multiple_parents";
    case UrdfErrc::multiple_roots: return "multiple_roots";
  }
  return "unknown";
}

namespace {

std::vector<double> parse_reals(const std::string& text, std::string_view what) {
  std::vector<double> out;
  std::istringstream in(text);
  in.imbue(std::locale::classic());
  std::string token;
  while (in >> token) {
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0' || !std::isfinite(v)) {
      throw UrdfError(UrdfErrc::invalid_value, "cannot parse '" + token + "' in " + std::string(what));
    }
    out.push_back(v);
  }
  return out;
}

Vec3 parse_vec3(const std::string& text, std::string_view what) {
  const auto v = parse_reals(text, what);
  if (v.size() != 3) {
    throw UrdfError(UrdfErrc::invalid_value, std::string(what) + " needs 3 components, got '" + text + "'");
  }
  return {v[0], v[1], v[2]};
}

double parse_real(const std::string& text, std::string_view what) {
  const auto v = parse_reals(text, what);
  if (v.size() != 1) {
    throw UrdfError(UrdfErrc::invalid_value, std::string(what) + " needs 1 value, got '" + text + "'");
  }
  return v[0];
}

std::optional<std::string> attr(const pt::ptree& node, const std::string& name) {
  if (auto v = node.get_optional<std::string>("<xmlattr>." + name)) return *v;
  return std::nullopt;
}

std::string required_attr(const pt::ptree& node, const std::string& element, const std::string& name) {
  auto v = attr(node, name);
  if (!v) throw UrdfError(UrdfErrc::malformed_xml, "<" + element + "> is missing attribute '" + name + "'");
  return *v;
}

Pose parse_origin(const pt::ptree& parent, std::string_view what) {
  const auto origin = parent.get_child_optional("origin");
  if (!origin) return Pose::identity();
  Pose pose;
  if (auto xyz = attr(*origin, "xyz")) pose.position = parse_vec3(*xyz, std::string(what) + " origin xyz");
  if (auto rpy = attr(*origin, "rpy")) {
    pose.orientation = UnitQuat::from_rpy(parse_vec3(*rpy, std::string(what) + " origin rpy"));
  }
  return pose;
}

Link parse_link(const pt::ptree& node) {
  Link link;
  link.name = required_attr(node, "link", "name");
  // Only the first visual carries geometry; collision/inertial are ignored.
  for (const auto& [tag, child] : node) {
    if (tag != "visual") continue;
    const auto mesh = child.get_child_optional("geometry.mesh");
    if (!mesh) continue;
    link.mesh_path = required_attr(*mesh, "mesh", "filename");
    if (auto s = attr(*mesh, "scale")) {
      link.mesh_scale = parse_vec3(*s, "link '" + link.name + "' mesh scale");
      if (!(link.mesh_scale.x > 0 && link.mesh_scale.y > 0 && link.mesh_scale.z > 0)) {
        throw UrdfError(UrdfErrc::invalid_value, "link '" + link.name + "' has non-positive mesh scale");
      }
    }
    link.visual_origin = parse_origin(child, "link '" + link.name + "' visual");
    break;
  }
  return link;
}

Joint parse_joint(const pt::ptree& node) {
  Joint joint;
  joint.name = required_attr(node, "joint", "name");
  const std::string type = required_attr(node, "joint", "type");
  bool continuous = false;
  if (type == "continuous") {
    continuous = true;
    joint.kind = JointKind::revolute;
  } else if (auto kind = joint_kind_from_string(type)) {
    joint.kind = *kind;
  } else {
    throw UrdfError(UrdfErrc::unknown_joint_type, "joint '" + joint.name + "' has type '" + type + "'");
  }

  const auto parent = node.get_child_optional("parent");
  const auto child = node.get_child_optional("child");
  if (!parent || !child) {
    throw UrdfError(UrdfErrc::malformed_xml, "joint '" + joint.name + "' needs <parent> and <child>");
  }
  joint.parent = required_attr(*parent, "parent", "link");
  joint.child = required_attr(*child, "child", "link");
  joint.origin = parse_origin(node, "joint '" + joint.name + "'");

  if (auto axis = node.get_child_optional("axis")) {
    if (auto xyz = attr(*axis, "xyz")) joint.axis = parse_vec3(*xyz, "joint '" + joint.name + "' axis");
  }
  if (joint.kind != JointKind::fixed) {
    const double n = joint.axis.norm();
    if (!(n > 1e-12)) {
      throw UrdfError(UrdfErrc::invalid_axis, "joint '" + joint.name + "' has a zero-length axis");
    }
    joint.axis = joint.axis / n;
  }

  if (continuous) {
    joint.limit = JointLimit{-std::numbers::pi, std::numbers::pi};
  } else if (joint.kind != JointKind::fixed) {
    const auto limit = node.get_child_optional("limit");
    if (!limit) {
      throw UrdfError(UrdfErrc::missing_limit, "joint '" + joint.name + "' has no <limit>");
    }
    JointLimit l;
    l.lower = parse_real(attr(*limit, "lower").value_or("0"), "joint '" + joint.name + "' lower limit");
    l.upper = parse_real(attr(*limit, "upper").value_or("0"), "joint '" + joint.name + "' upper limit");
    if (l.lower > l.upper) {
      throw UrdfError(UrdfErrc::invalid_value, "joint '" + joint.name + "' has lower > upper");
    }
    joint.limit = l;
  }
  return joint;
}

}  // namespace

void validate_model(const UrdfModel& model) {
  if (model.links.empty()) throw UrdfError(UrdfErrc::empty_model, "model '" + model.name + "' has no links");

  std::set<std::string, std::less<>> link_names;
  for (const auto& l : model.links) {
    if (!link_names.insert(l.name).second) {
      throw UrdfError(UrdfErrc::repeated_link, "link '" + l.name + "' is declared twice");
    }
    if (!(l.mesh_scale.x > 0 && l.mesh_scale.y > 0 && l.mesh_scale.z > 0)) {
      throw UrdfError(UrdfErrc::invalid_value, "link '" + l.name + "' has non-positive mesh scale");
    }
  }

  std::set<std::string, std::less<>> joint_names;
  std::map<std::string, std::string, std::less<>> parent_of;
  for (const auto& j : model.joints) {
    if (!joint_names.insert(j.name).second) {
      throw UrdfError(UrdfErrc::repeated_joint, "joint '" + j.name + "' is declared twice");
    }
    if (!link_names.contains(j.parent) || !link_names.contains(j.child)) {
      throw UrdfError(UrdfErrc::dangling_reference,
                      "joint '" + j.name + "' connects '" + j.parent + "' -> '" + j.child +
                          "' but one of them is not a link");
    }
    if (j.parent == j.child) {
      throw UrdfError(UrdfErrc::cyclic_structure, "joint '" + j.name + "' connects '" + j.child + "' to itself");
    }
    if (j.kind != JointKind::fixed) {
      if (!j.limit) throw UrdfError(UrdfErrc::missing_limit, "joint '" + j.name + "' has no limit");
      if (j.limit->lower > j.limit->upper) {
        throw UrdfError(UrdfErrc::invalid_value, "joint '" + j.name + "' has lower > upper");
      }
      if (std::abs(j.axis.norm() - 1.0) > 1e-9) {
        throw UrdfError(UrdfErrc::invalid_axis, "joint '" + j.name + "' axis is not unit length");
      }
    }
    if (auto [it, inserted] = parent_of.emplace(j.child, j.parent); !inserted) {
      throw UrdfError(UrdfErrc::multiple_parents,
                      "link '" + j.child + "' has parents '" + it->second + "' and '" + j.parent + "'");
    }
  }

  std::vector<std::string> roots;
  for (const auto& l : model.links) {
    if (!parent_of.contains(l.name)) roots.push_back(l.name);
  }
  if (roots.empty()) {
    throw UrdfError(UrdfErrc::cyclic_structure, "every link has a parent; the joints form a cycle");
  }
  // Walk up from every link; a link that never reaches a root sits on a cycle.
  for (const auto& l : model.links) {
    std::string cur = l.name;
    for (std::size_t steps = 0;; ++steps) {
      auto it = parent_of.find(cur);
      if (it == parent_of.end()) break;
      if (steps > model.links.size()) {
        throw UrdfError(UrdfErrc::cyclic_structure, "link '" + l.name + "' lies on a joint cycle");
      }
      cur = it->second;
    }
  }
  if (roots.size() > 1) {
    throw UrdfError(UrdfErrc::multiple_roots,
                    "links '" + roots[0] + "' and '" + roots[1] + "' are both roots (model is disconnected)");
  }
}

UrdfModel parse_urdf(std::string_view text, const std::filesystem::path& base_dir) {
  pt::ptree doc;
  try {
    std::istringstream in{std::string(text)};
    pt::read_xml(in, doc, pt::xml_parser::no_comments | pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw UrdfError(UrdfErrc::malformed_xml, e.what());
  }
  const auto robot = doc.get_child_optional("robot");
  if (!robot) throw UrdfError(UrdfErrc::malformed_xml, "document has no <robot> element");

  UrdfModel model;
  model.base_dir = base_dir;
  model.name = attr(*robot, "name").value_or("");
  for (const auto& [tag, node] : *robot) {
    if (tag == "link") {
      model.links.push_back(parse_link(node));
    } else if (tag == "joint") {
      model.joints.push_back(parse_joint(node));
    }
  }
  validate_model(model);
  return model;
}

UrdfModel load_urdf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open URDF file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_urdf(buf.str(), path.parent_path());
}

std::string format_real(double value) {
  if (value == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  std::string s = buf;
  if (s == "-0") return "0";
  return s;
}

namespace {

std::string fmt3(const Vec3& v) { return format_real(v.x) + " " + format_real(v.y) + " " + format_real(v.z); }

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

void emit_origin(std::ostream& out, const Pose& pose, const char* indent) {
  out << indent << "<origin xyz=\"" << fmt3(pose.position) << "\" rpy=\"" << fmt3(pose.orientation.to_rpy())
      << "\"/>\n";
}

}  // namespace

std::string emit_urdf(const UrdfModel& model) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\"?>\n";
  out << "<robot name=\"" << xml_escape(model.name) << "\">\n";
  for (const auto& link : model.links) {
    if (link.mesh_path.empty()) {
      out << "  <link name=\"" << xml_escape(link.name) << "\"/>\n";
      continue;
    }
    out << "  <link name=\"" << xml_escape(link.name) << "\">\n";
    out << "    <visual>\n";
    emit_origin(out, link.visual_origin, "      ");
    out << "      <geometry>\n";
    out << "        <mesh filename=\"" << xml_escape(link.mesh_path) << "\" scale=\"" << fmt3(link.mesh_scale)
        << "\"/>\n";
    out << "      </geometry>\n";
    out << "    </visual>\n";
    out << "  </link>\n";
  }
  for (const auto& joint : model.joints) {
    out << "  <joint name=\"" << xml_escape(joint.name) << "\" type=\"" << to_string(joint.kind) << "\">\n";
    out << "    <parent link=\"" << xml_escape(joint.parent) << "\"/>\n";
    out << "    <child link=\"" << xml_escape(joint.child) << "\"/>\n";
    emit_origin(out, joint.origin, "    ");
    if (joint.kind != JointKind::fixed) {
      out << "    <axis xyz=\"" << fmt3(joint.axis) << "\"/>\n";
      const JointLimit l = joint.limit.value_or(JointLimit{});
      out << "    <limit lower=\"" << format_real(l.lower) << "\" upper=\"" << format_real(l.upper)
          << "\" effort=\"0\" velocity=\"0\"/>\n";
    }
    out << "  </joint>\n";
  }
  out << "</robot>\n";
  return out.str();
}

void save_urdf(const UrdfModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write URDF file " + path.string());
  out << emit_urdf(model);
}

namespace {

bool near(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

bool near(const Vec3& a, const Vec3& b, double tol) {
  return near(a.x, b.x, tol) && near(a.y, b.y, tol) && near(a.z, b.z, tol);
}

bool near(const Pose& a, const Pose& b, double tol) {
  return near(a.position, b.position, tol) && 1.0 - std::abs(a.orientation.dot(b.orientation)) <= tol;
}

}  // namespace

bool structurally_equal(const UrdfModel& a, const UrdfModel& b, double tol) {
  if (a.name != b.name || a.links.size() != b.links.size() || a.joints.size() != b.joints.size()) return false;
  for (std::size_t i = 0; i < a.links.size(); ++i) {
    const auto& la = a.links[i];
    const auto& lb = b.links[i];
    if (la.name != lb.name || la.mesh_path != lb.mesh_path) return false;
    if (!near(la.mesh_scale, lb.mesh_scale, tol)) return false;
    if (la.has_visual() && !near(la.visual_origin, lb.visual_origin, tol)) return false;
  }
  for (std::size_t i = 0; i < a.joints.size(); ++i) {
    const auto& ja = a.joints[i];
    const auto& jb = b.joints[i];
    if (ja.name != jb.name || ja.kind != jb.kind || ja.parent != jb.parent || ja.child != jb.child) return false;
    if (!near(ja.origin, jb.origin, tol)) return false;
    if (ja.kind == JointKind::fixed) continue;
    if (!near(ja.axis, jb.axis, tol)) return false;
    if (ja.limit.has_value() != jb.limit.has_value()) return false;
    if (ja.limit && (!near(ja.limit->lower, jb.limit->lower, tol) || !near(ja.limit->upper, jb.limit->upper, tol))) {
      return false;
    }
  }
  return true;
}

}  // namespace artkit
