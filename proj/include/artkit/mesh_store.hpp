#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <shared_mutex>
#include <stdexcept>
#include <string>

#include "artkit/model.hpp"

namespace artkit {

class MeshResolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Loads OBJ files on first use and shares them afterwards. Concurrent lookups
/// are safe; insertion takes an exclusive lock.
class MeshCache {
 public:
  std::shared_ptr<const TriMesh> load(const std::filesystem::path& path) const;

 private:
  mutable std::shared_mutex mutex_;
  mutable std::map<std::filesystem::path, std::shared_ptr<const TriMesh>> meshes_;
};

/// The link's geometry in its own link frame: mesh scaled by mesh_scale and
/// moved by visual_origin. Returns nullptr for links without a visual.
std::shared_ptr<const TriMesh> link_geometry(const UrdfModel& model, const Link& link, const MeshCache& cache);

/// Every visual link's geometry posed in the world at the given configuration.
std::map<std::string, TriMesh, std::less<>> world_meshes(const UrdfModel& model, const JointValues& joint_values,
                                                         const MeshCache& cache);

/// Per-link surface samples in the world frame. Links without a visual are
/// omitted.
std::map<std::string, PointCloud, std::less<>> model_point_clouds(const UrdfModel& model,
                                                                  const JointValues& joint_values,
                                                                  std::size_t n_per_link, std::uint64_t seed,
                                                                  const MeshCache& cache);

}  // namespace artkit
