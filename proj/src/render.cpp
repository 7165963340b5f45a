#include "artkit/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include "artkit/kinematics.hpp"
#include "json.hpp"

namespace artkit {

const char* to_string(CameraPreset camera) {
  switch (camera) {
    case CameraPreset::front: return "front";
    case CameraPreset::back: return "back";
    case CameraPreset::left: return "left";
    case CameraPreset::right: return "right";
    case CameraPreset::top: return "top";
    case CameraPreset::iso: return "iso";
  }
  return "iso";
}

std::optional<CameraPreset> camera_from_string(std::string_view name) {
  for (auto c : {CameraPreset::front, CameraPreset::back, CameraPreset::left, CameraPreset::right, CameraPreset::top,
                 CameraPreset::iso}) {
    if (name == to_string(c)) return c;
  }
  return std::nullopt;
}

Rgb segment_color(std::size_t index, std::size_t count) {
  // HSV with s = v = 1.
  const double h = 6.0 * static_cast<double>(index) / static_cast<double>(std::max<std::size_t>(count, 1));
  const int sector = static_cast<int>(std::floor(h)) % 6;
  const double f = h - std::floor(h);
  const auto up = static_cast<std::uint8_t>(std::lround(255.0 * f));
  const auto down = static_cast<std::uint8_t>(255 - up);
  switch (sector) {
    case 0: return {255, up, 0};
    case 1: return {down, 255, 0};
    case 2: return {0, 255, up};
    case 3: return {0, down, 255};
    case 4: return {up, 0, 255};
    default: return {255, 0, down};
  }
}

namespace {

struct View {
  Vec3 right, up, toward_viewer;
};

View view_of(CameraPreset camera) {
  const Vec3 z{0, 0, 1};
  Vec3 eye;
  switch (camera) {
    case CameraPreset::front: eye = {1, 0, 0}; break;
    case CameraPreset::back: eye = {-1, 0, 0}; break;
    case CameraPreset::left: eye = {0, -1, 0}; break;
    case CameraPreset::right: eye = {0, 1, 0}; break;
    case CameraPreset::top: return {{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}};
    case CameraPreset::iso: eye = Vec3{1, 1, 1}.normalized(); break;
  }
  const Vec3 right = z.cross(eye).normalized();
  return {right, eye.cross(right).normalized(), eye};
}

// Light comes from over the viewer's shoulder.
double shade(const Vec3& normal, const View& v) {
  const Vec3 light = (v.toward_viewer * 0.8 + v.up * 0.5 + v.right * 0.3).normalized();
  return 0.3 + 0.7 * std::abs(normal.dot(light));
}

}  // namespace

Image render_scene(const std::vector<SceneMesh>& scene, const RenderOptions& options) {
  if (options.width <= 0 || options.height <= 0) throw RenderError("viewport has zero area");
  const Rgb background = options.mode == RenderMode::segmented ? kSegmentedBackground : kShadedBackground;
  Image img(options.width, options.height, background);

  const View view = view_of(options.camera);
  auto project = [&](const Vec3& p) { return Vec3{p.dot(view.right), p.dot(view.up), p.dot(view.toward_viewer)}; };

  // Screen-space bounds of the framing box (or of the scene).
  double lo_u = std::numeric_limits<double>::infinity(), hi_u = -lo_u, lo_v = lo_u, hi_v = -lo_u;
  auto extend = [&](const Vec3& p) {
    const Vec3 s = project(p);
    lo_u = std::min(lo_u, s.x);
    hi_u = std::max(hi_u, s.x);
    lo_v = std::min(lo_v, s.y);
    hi_v = std::max(hi_v, s.y);
  };
  if (options.framing) {
    const Aabb& b = *options.framing;
    for (int i = 0; i < 8; ++i) {
      extend({(i & 1) ? b.max.x : b.min.x, (i & 2) ? b.max.y : b.min.y, (i & 4) ? b.max.z : b.min.z});
    }
  } else {
    for (const auto& m : scene) {
      for (const auto& v : m.mesh.vertices) extend(v);
    }
  }
  if (!(hi_u >= lo_u)) return img;  // nothing to draw

  const double span = std::max({hi_u - lo_u, hi_v - lo_v, 1e-9});
  const double scale = 0.9 * std::min(options.width, options.height) / span;
  const double cu = 0.5 * (lo_u + hi_u), cv = 0.5 * (lo_v + hi_v);
  auto to_screen = [&](const Vec3& p) {
    const Vec3 s = project(p);
    return Vec3{0.5 * options.width + (s.x - cu) * scale, 0.5 * options.height - (s.y - cv) * scale, s.z};
  };

  std::vector<double> depth(img.pixels.size(), -std::numeric_limits<double>::infinity());
  for (std::size_t li = 0; li < scene.size(); ++li) {
    const TriMesh& mesh = scene[li].mesh;
    const Rgb base = options.mode == RenderMode::segmented ? segment_color(li, scene.size()) : Rgb{200, 200, 200};
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      const auto [a, b, c] = mesh.triangle(t);
      const Vec3 n3 = (b - a).cross(c - a);
      if (n3.norm() == 0.0) continue;
      Rgb color = base;
      if (options.mode == RenderMode::shaded) {
        const double k = shade(n3.normalized(), view);
        color = {static_cast<std::uint8_t>(std::lround(base.r * k)), static_cast<std::uint8_t>(std::lround(base.g * k)),
                 static_cast<std::uint8_t>(std::lround(base.b * k))};
      }
      const Vec3 s0 = to_screen(a), s1 = to_screen(b), s2 = to_screen(c);
      const double area = (s1.x - s0.x) * (s2.y - s0.y) - (s1.y - s0.y) * (s2.x - s0.x);
      if (std::abs(area) < 1e-12) continue;
      const int x0 = std::max(0, static_cast<int>(std::floor(std::min({s0.x, s1.x, s2.x}))));
      const int x1 = std::min(options.width - 1, static_cast<int>(std::ceil(std::max({s0.x, s1.x, s2.x}))));
      const int y0 = std::max(0, static_cast<int>(std::floor(std::min({s0.y, s1.y, s2.y}))));
      const int y1 = std::min(options.height - 1, static_cast<int>(std::ceil(std::max({s0.y, s1.y, s2.y}))));
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const double px = x + 0.5, py = y + 0.5;
          const double w0 = ((s1.x - px) * (s2.y - py) - (s1.y - py) * (s2.x - px)) / area;
          const double w1 = ((s2.x - px) * (s0.y - py) - (s2.y - py) * (s0.x - px)) / area;
          const double w2 = 1.0 - w0 - w1;
          if (w0 < 0 || w1 < 0 || w2 < 0) continue;
          const double z = w0 * s0.z + w1 * s1.z + w2 * s2.z;
          const std::size_t idx = static_cast<std::size_t>(y) * options.width + x;
          if (z > depth[idx]) {
            depth[idx] = z;
            img.pixels[idx] = color;
          }
        }
      }
    }
  }
  return img;
}

std::vector<std::pair<std::string, Rgb>> segment_legend(const UrdfModel& model) {
  std::vector<std::pair<std::string, Rgb>> out;
  std::size_t visual = 0;
  for (const auto& l : model.links) visual += l.has_visual() ? 1 : 0;
  std::size_t i = 0;
  for (const auto& l : model.links) {
    if (l.has_visual()) out.emplace_back(l.name, segment_color(i++, visual));
  }
  return out;
}

namespace {

std::vector<SceneMesh> scene_of(const UrdfModel& model, const JointValues& values, const MeshCache& cache) {
  auto meshes = world_meshes(model, values, cache);
  std::vector<SceneMesh> scene;
  for (const auto& l : model.links) {
    if (auto it = meshes.find(l.name); it != meshes.end()) scene.push_back({l.name, std::move(it->second)});
  }
  return scene;
}

}  // namespace

Image render_model(const UrdfModel& model, const JointValues& joint_values, const RenderOptions& options,
                   const MeshCache& cache) {
  return render_scene(scene_of(model, joint_values, cache), options);
}

Aabb model_bounds(const UrdfModel& model, const std::vector<JointValues>& configurations, const MeshCache& cache) {
  std::optional<Aabb> box;
  for (const auto& values : configurations) {
    for (const auto& m : scene_of(model, values, cache)) {
      if (m.mesh.empty()) continue;
      const Aabb b = aabb_of(m.mesh);
      if (box) {
        box->expand(b.min);
        box->expand(b.max);
      } else {
        box = b;
      }
    }
  }
  if (!box) throw RenderError("model has no visible geometry");
  return *box;
}

std::vector<JointValues> joint_sweep(const UrdfModel& model, const std::string& joint, int frames) {
  const Joint* j = model.find_joint(joint);
  if (j == nullptr) throw RenderError("unknown joint '" + joint + "'");
  if (frames < 2) throw RenderError("a sweep needs at least 2 frames");
  const JointLimit lim = j->limit.value_or(JointLimit{});
  std::vector<JointValues> out;
  for (int i = 0; i < frames; ++i) {
    double v = lim.lower + (lim.upper - lim.lower) * static_cast<double>(i) / static_cast<double>(frames - 1);
    if (i == frames - 1) v = lim.upper;
    out.push_back({{joint, v}});
  }
  return out;
}

namespace {

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

}  // namespace

Image render_external(const std::string& command, const std::filesystem::path& urdf,
                      const std::filesystem::path& joint_file, CameraPreset camera,
                      const std::filesystem::path& output) {
  std::filesystem::remove(output);
  const std::string cmd = command + " " + shell_quote(urdf.string()) + " " + shell_quote(joint_file.string()) + " " +
                          to_string(camera) + " " + shell_quote(output.string());
  const int status = std::system(cmd.c_str());
  if (status != 0) throw RenderError("external renderer exited with status " + std::to_string(status));
  std::ifstream f(output, std::ios::binary);
  if (!f) throw RenderError("external renderer did not write " + output.string());
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return decode_png(ss.str());
  } catch (const std::exception& e) {
    throw RenderError(std::string("external renderer output unreadable: ") + e.what());
  }
}

std::string joint_values_to_json(const JointValues& values) {
  nlohmann::json doc = nlohmann::json::object();
  for (const auto& [k, v] : values) doc[k] = v;
  return doc.dump(2) + "\n";
}

JointValues joint_values_from_json(std::string_view text) {
  JointValues out;
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw RenderError("joint file must hold an object of name: value pairs");
    for (const auto& [k, v] : doc.items()) out[k] = v.get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw RenderError(std::string("malformed joint file: ") + e.what());
  }
  return out;
}

}  // namespace artkit
