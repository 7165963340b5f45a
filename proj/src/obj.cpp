#include "artkit/obj.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "artkit/urdf.hpp"

namespace artkit {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

double to_real(std::string_view token, std::size_t line_no) {
  std::string s(token);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || !std::isfinite(v)) {
    throw ObjError(ObjError::Code::invalid_number, line_no, "cannot parse '" + s + "'");
  }
  return v;
}

std::uint32_t to_index(std::string_view token, std::size_t vertex_count, std::size_t line_no) {
  const std::string_view head = token.substr(0, token.find('/'));
  long long idx = 0;
  auto [ptr, ec] = std::from_chars(head.data(), head.data() + head.size(), idx);
  if (ec != std::errc{} || ptr != head.data() + head.size()) {
    throw ObjError(ObjError::Code::invalid_number, line_no, "bad face index '" + std::string(token) + "'");
  }
  const long long n = static_cast<long long>(vertex_count);
  const long long resolved = idx < 0 ? n + idx : idx - 1;
  if (idx == 0 || resolved < 0 || resolved >= n) {
    throw ObjError(ObjError::Code::index_out_of_range, line_no,
                   "face index " + std::to_string(idx) + " with " + std::to_string(n) + " vertices");
  }
  return static_cast<std::uint32_t>(resolved);
}

}  // namespace

TriMesh parse_obj(std::string_view text) {
  TriMesh mesh;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0] == "v") {
      if (tokens.size() < 4) throw ObjError(ObjError::Code::invalid_number, line_no, "vertex needs 3 coordinates");
      mesh.vertices.push_back({to_real(tokens[1], line_no), to_real(tokens[2], line_no), to_real(tokens[3], line_no)});
    } else if (tokens[0] == "f") {
      if (tokens.size() < 4) {
        throw ObjError(ObjError::Code::short_face, line_no,
                       "face has " + std::to_string(tokens.size() - 1) + " vertices");
      }
      std::vector<std::uint32_t> idx;
      for (std::size_t i = 1; i < tokens.size(); ++i) idx.push_back(to_index(tokens[i], mesh.vertices.size(), line_no));
      for (std::size_t i = 1; i + 1 < idx.size(); ++i) mesh.triangles.push_back({idx[0], idx[i], idx[i + 1]});
    }
  }
  return mesh;
}

TriMesh load_obj(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ObjError(ObjError::Code::io, 0, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_obj(buf.str());
}

std::string emit_obj(const TriMesh& mesh) {
  std::ostringstream out;
  for (const auto& v : mesh.vertices) {
    out << "v " << format_real(v.x) << ' ' << format_real(v.y) << ' ' << format_real(v.z) << '\n';
  }
  for (const auto& t : mesh.triangles) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  return out.str();
}

void save_obj(const TriMesh& mesh, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ObjError(ObjError::Code::io, 0, "cannot write " + path.string());
  out << emit_obj(mesh);
}

}  // namespace artkit
