#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "artkit/geometry.hpp"

namespace artkit {

class ObjError : public std::runtime_error {
 public:
  enum class Code { index_out_of_range, short_face, invalid_number, io };
  ObjError(Code code, std::size_t line, const std::string& what)
      : std::runtime_error("obj line " + std::to_string(line) + ": " + what), code_(code), line_(line) {}
  Code code() const { return code_; }
  std::size_t line() const { return line_; }

 private:
  Code code_;
  std::size_t line_;
};

/// Reads `v` and `f` records; polygons are fan-triangulated and every other
/// record is ignored. Face indices may be negative (relative) and may carry
/// `/vt/vn` suffixes.
TriMesh parse_obj(std::string_view text);
TriMesh load_obj(const std::filesystem::path& path);

/// Writes `v`/`f` records with 9 significant digits.
std::string emit_obj(const TriMesh& mesh);
void save_obj(const TriMesh& mesh, const std::filesystem::path& path);

}  // namespace artkit
