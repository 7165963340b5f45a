#include "artkit/mesh_store.hpp"

#include <mutex>

#include "artkit/kinematics.hpp"
#include "artkit/obj.hpp"

namespace artkit {

std::shared_ptr<const TriMesh> MeshCache::load(const std::filesystem::path& path) const {
  const auto key = path.lexically_normal();
  {
    std::shared_lock lock(mutex_);
    if (auto it = meshes_.find(key); it != meshes_.end()) return it->second;
  }
  if (!std::filesystem::exists(key)) throw MeshResolveError("mesh file not found: " + key.string());
  auto mesh = std::make_shared<const TriMesh>(load_obj(key));
  std::unique_lock lock(mutex_);
  return meshes_.try_emplace(key, std::move(mesh)).first->second;
}

std::shared_ptr<const TriMesh> link_geometry(const UrdfModel& model, const Link& link, const MeshCache& cache) {
  std::shared_ptr<const TriMesh> raw = link.mesh;
  if (!raw) {
    if (link.mesh_path.empty()) return nullptr;
    std::filesystem::path p = link.mesh_path;
    if (p.is_relative()) p = model.base_dir / p;
    try {
      raw = cache.load(p);
    } catch (const std::exception& e) {
      throw MeshResolveError("link '" + link.name + "': " + e.what());
    }
  }
  return std::make_shared<const TriMesh>(transformed(scaled(*raw, link.mesh_scale), link.visual_origin));
}

std::map<std::string, TriMesh, std::less<>> world_meshes(const UrdfModel& model, const JointValues& joint_values,
                                                         const MeshCache& cache) {
  const LinkPoses poses = forward_kinematics(model, joint_values);
  std::map<std::string, TriMesh, std::less<>> out;
  for (const auto& link : model.links) {
    auto geom = link_geometry(model, link, cache);
    if (!geom || geom->empty()) continue;
    TriMesh m = transformed(*geom, poses.at(link.name));
    m.color_tag = geom->color_tag;
    out.emplace(link.name, std::move(m));
  }
  return out;
}

std::map<std::string, PointCloud, std::less<>> model_point_clouds(const UrdfModel& model,
                                                                  const JointValues& joint_values,
                                                                  std::size_t n_per_link, std::uint64_t seed,
                                                                  const MeshCache& cache) {
  const LinkPoses poses = forward_kinematics(model, joint_values);
  std::map<std::string, PointCloud, std::less<>> out;
  for (const auto& link : model.links) {
    auto geom = link_geometry(model, link, cache);
    if (!geom || geom->empty()) continue;
    out.emplace(link.name, transformed(sample_surface(*geom, n_per_link, seed), poses.at(link.name)));
  }
  return out;
}

}  // namespace artkit
