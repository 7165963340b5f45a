#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "artkit/mesh_store.hpp"
#include "artkit/png.hpp"

namespace artkit {

class RenderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Named orthographic views. `front` looks from +x toward the origin with +z up.
enum class CameraPreset { front, back, left, right, top, iso };

const char* to_string(CameraPreset camera);
std::optional<CameraPreset> camera_from_string(std::string_view name);

enum class RenderMode { shaded, segmented };

struct RenderOptions {
  int width = 256;
  int height = 256;
  CameraPreset camera = CameraPreset::iso;
  RenderMode mode = RenderMode::shaded;
  /// World box to frame instead of the scene bounds; keeps sweeps steady.
  std::optional<Aabb> framing;
};

inline constexpr Rgb kShadedBackground{255, 255, 255};
inline constexpr Rgb kSegmentedBackground{0, 0, 0};

/// Saturated color for link `index` of `count`, evenly spaced in hue.
Rgb segment_color(std::size_t index, std::size_t count);

struct SceneMesh {
  std::string link;
  TriMesh mesh;  // world coordinates
};

/// Flat-shaded rasterization with a per-pixel depth buffer. Links get their
/// segment colors in segmented mode and a uniform gray otherwise.
Image render_scene(const std::vector<SceneMesh>& scene, const RenderOptions& options);

/// Poses every visual link and renders it. Segment colors follow link order.
Image render_model(const UrdfModel& model, const JointValues& joint_values, const RenderOptions& options,
                   const MeshCache& cache);

/// Link name -> segment color, as used by render_model.
std::vector<std::pair<std::string, Rgb>> segment_legend(const UrdfModel& model);

/// Bounds of the model over the given configurations; use as fixed framing.
Aabb model_bounds(const UrdfModel& model, const std::vector<JointValues>& configurations, const MeshCache& cache);

/// `frames` configurations moving one joint evenly from its lower to its upper
/// limit; frame i sits at lower + (upper - lower) * i / (frames - 1).
std::vector<JointValues> joint_sweep(const UrdfModel& model, const std::string& joint, int frames);

/// Runs `command "<urdf>" "<joints.json>" <camera> "<output.png>"` and reads
/// the image back. The command must exit 0 and write the file.
Image render_external(const std::string& command, const std::filesystem::path& urdf,
                      const std::filesystem::path& joint_file, CameraPreset camera,
                      const std::filesystem::path& output);

std::string joint_values_to_json(const JointValues& values);
JointValues joint_values_from_json(std::string_view text);

}  // namespace artkit
