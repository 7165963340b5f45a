#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "artkit/geometry.hpp"
#include "artkit/model.hpp"

namespace artkit {

struct SourceLocation {
  int line = 0;
  int column = 0;
  bool operator==(const SourceLocation&) const = default;
};

std::string to_string(const SourceLocation& loc);

enum class PlaceAxis { pos_x, neg_x, pos_y, neg_y, pos_z, neg_z };

const char* to_string(PlaceAxis axis);
std::optional<PlaceAxis> place_axis_from_string(std::string_view token);
/// Index (0, 1, 2) and sign (+1, -1) of a placement axis.
int axis_index(PlaceAxis axis);
double axis_sign(PlaceAxis axis);

struct PartDecl {
  std::string name;
  std::string mesh_ref;
  Vec3 scale{1.0, 1.0, 1.0};
  SourceLocation location;
};

/// Put `child` against `parent` along a world axis: centers aligned on the two
/// other axes (plus `lateral_offset`), tightest contact along `axis`, then
/// moved `clearance` meters further out.
struct PlaceStmt {
  std::string child;
  std::string parent;
  PlaceAxis axis = PlaceAxis::pos_z;
  Vec3 lateral_offset;
  double clearance = 0.0;
  SourceLocation location;
};

/// A joint given in world terms: global axis, and for revolute joints a world
/// point the rotation axis passes through.
struct JointStmt {
  std::string child;
  std::string parent;
  JointKind kind = JointKind::fixed;
  Vec3 global_axis{1.0, 0.0, 0.0};
  std::optional<Vec3> global_pivot;
  JointLimit limit;
  SourceLocation location;
};

using Statement = std::variant<PlaceStmt, JointStmt>;

struct ArtProgram {
  std::vector<PartDecl> parts;
  std::vector<Statement> statements;

  const PartDecl* find_part(std::string_view name) const;
};

enum class ArtlangErrc {
  syntax,
  invalid_axis,
  invalid_value,
  undeclared_part,
  duplicate_part,
  duplicate_placement,
  duplicate_joint,
};

const char* to_string(ArtlangErrc code);

class ArtlangError : public std::runtime_error {
 public:
  ArtlangError(ArtlangErrc code, SourceLocation loc, const std::string& message)
      : std::runtime_error(to_string(loc) + ": " + message), code_(code), location_(loc), message_(message) {}
  ArtlangErrc code() const { return code_; }
  const SourceLocation& location() const { return location_; }
  const std::string& message() const { return message_; }

 private:
  ArtlangErrc code_;
  SourceLocation location_;
  std::string message_;
};

ArtProgram parse_artlang(std::string_view source);

/// Canonical source text; parse_artlang(pretty_print(p)) prints back identically.
std::string pretty_print(const ArtProgram& program);

}  // namespace artkit
