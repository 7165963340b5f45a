#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "artkit/artlang.hpp"
#include "artkit/collision.hpp"
#include "artkit/model.hpp"

namespace artkit {

class AssetLibrary;

/// Contact search stops once the bracket is narrower than this (meters).
inline constexpr double kContactTolerance = 1e-4;

class PlacementError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Places `child_mesh` against `parent_assembly[0]` along `stmt.axis`,
/// avoiding every mesh in `parent_assembly`. The child is centered on the
/// parent's bounding-box center on the two other axes (plus the lateral part
/// of `stmt.lateral_offset`). Along the axis the search starts where the two
/// bounding boxes touch; if that position intersects, bisection runs between
/// it and the first offset clear of the whole assembly's bounds. The contact
/// offset is then moved out by `stmt.clearance`. Orientation is identity.
Pose place_with_collision(const TriMesh& child_mesh, std::span<const PosedMesh> parent_assembly,
                          const PlaceStmt& stmt, int* collision_queries = nullptr);

class JointResolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Converts a world-frame joint statement into a URDF joint relative to the
/// parent link frame. `world_poses` must hold the parent's link frame and the
/// child's placed pose. Revolute joints put the joint frame at the point of the
/// pivot line closest to the child's placed origin.
Joint resolve_joint(const JointStmt& stmt, const LinkPoses& world_poses);

enum class CompileErrc { placement_failure, joint_resolution_failure, unresolvable_mesh };

const char* to_string(CompileErrc code);

class CompileError : public std::runtime_error {
 public:
  CompileError(CompileErrc code, SourceLocation loc, const std::string& message)
      : std::runtime_error(to_string(loc) + ": " + std::string(to_string(code)) + ": " + message),
        code_(code),
        location_(loc),
        message_(message) {}
  CompileErrc code() const { return code_; }
  const SourceLocation& location() const { return location_; }
  const std::string& message() const { return message_; }

 private:
  CompileErrc code_;
  SourceLocation location_;
  std::string message_;
};

struct CompileDiagnostics {
  std::vector<std::pair<SourceLocation, std::string>> warnings;
  /// Collision queries spent per placement, keyed by statement location
  /// (implicit placements use the part declaration's location).
  std::vector<std::pair<SourceLocation, int>> collision_iterations;
};

struct CompileOptions {
  std::string model_name = "model";
  /// Directories searched, in order, for relative mesh references.
  std::vector<std::filesystem::path> search_dirs;
  /// Emitted mesh paths are made relative to this directory when set.
  std::filesystem::path output_dir;
};

struct CompileResult {
  UrdfModel model;
  CompileDiagnostics diagnostics;
  /// World pose of every part as placed (before joint frames are chosen).
  LinkPoses placed;
};

/// Runs placements in statement order (the first declared part is the root at
/// the identity), stacks unplaced parts on the root along +z, then resolves
/// joints. Parts without a joint statement get a fixed joint to the part they
/// were placed on.
CompileResult compile(const ArtProgram& program, const CompileOptions& options);
/// Same, with the library root appended to the mesh search path.
CompileResult compile(const ArtProgram& program, const AssetLibrary& library, CompileOptions options);

}  // namespace artkit
