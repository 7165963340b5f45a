#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "artkit/model.hpp"

namespace artkit {

/// Reasons a URDF document is rejected. Each invalid-document class maps to
/// exactly one code.
enum class UrdfErrc {
  malformed_xml,       // not XML, or no <robot> root
  invalid_value,       // unparsable number, bad scale, lower > upper, ...
  empty_model,         // no links
  unknown_joint_type,
  missing_limit,       // prismatic/revolute without <limit>
  invalid_axis,        // zero-length axis on a moving joint
  repeated_link,
  repeated_joint,
  dangling_reference,  // parent/child names a link that does not exist
  cyclic_structure,    // self-loop, cycle, or links unreachable from the root
  multiple_parents,    // a link is the child of two joints
  multiple_roots,      // disconnected: more than one link is never a child
};

const char* to_string(UrdfErrc code);

class UrdfError : public std::runtime_error {
 public:
  UrdfError(UrdfErrc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  UrdfErrc code() const { return code_; }

 private:
  UrdfErrc code_;
};

/// Parses the supported URDF subset. `base_dir` is stored on the model for
/// mesh resolution.
UrdfModel parse_urdf(std::string_view text, const std::filesystem::path& base_dir = {});
UrdfModel load_urdf(const std::filesystem::path& path);

/// Checks the tree invariants, throwing UrdfError with the matching code.
void validate_model(const UrdfModel& model);

/// Deterministic emission: links then joints in insertion order, reals with 9
/// significant digits, orientations as fixed-axis rpy.
std::string emit_urdf(const UrdfModel& model);
void save_urdf(const UrdfModel& model, const std::filesystem::path& path);

/// Field-by-field comparison. Reals compare with |a - b| <= tol * max(1, |a|, |b|);
/// orientations compare up to the quaternion double cover.
bool structurally_equal(const UrdfModel& a, const UrdfModel& b, double tol = 1e-7);

/// Prints a real the way emit_urdf does.
std::string format_real(double value);

}  // namespace artkit
