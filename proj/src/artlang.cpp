#include "artkit/artlang.hpp"

#include <cctype>
#include <set>
#include <sstream>

#include "artkit/urdf.hpp"

namespace artkit {

std::string to_string(const SourceLocation& loc) {
  return std::to_string(loc.line) + ":" + std::to_string(loc.column);
}

const char* to_string(PlaceAxis axis) {
  switch (axis) {
    case PlaceAxis::pos_x: return "+x";
    case PlaceAxis::neg_x: return "-x";
    case PlaceAxis::pos_y: return "+y";
    case PlaceAxis::neg_y: return "-y";
    case PlaceAxis::pos_z: return "+z";
    case PlaceAxis::neg_z: return "-z";
  }
  return "+z";
}

std::optional<PlaceAxis> place_axis_from_string(std::string_view token) {
  if (token == "+x") return PlaceAxis::pos_x;
  if (token == "-x") return PlaceAxis::neg_x;
  if (token == "+y") return PlaceAxis::pos_y;
  if (token == "-y") return PlaceAxis::neg_y;
  if (token == "+z") return PlaceAxis::pos_z;
  if (token == "-z") return PlaceAxis::neg_z;
  return std::nullopt;
}

int axis_index(PlaceAxis axis) { return static_cast<int>(axis) / 2; }
double axis_sign(PlaceAxis axis) { return static_cast<int>(axis) % 2 == 0 ? 1.0 : -1.0; }

const char* to_string(ArtlangErrc code) {
  switch (code) {
    case ArtlangErrc::syntax: return "syntax";
    case ArtlangErrc::invalid_axis: return "invalid_axis";
    case ArtlangErrc::invalid_value: return "invalid_value";
    case ArtlangErrc::undeclared_part: return "undeclared_part";
    case ArtlangErrc::duplicate_part: return "duplicate_part";
    case ArtlangErrc::duplicate_placement: return "duplicate_placement";
    case ArtlangErrc::duplicate_joint: return "duplicate_joint";
  }
  return "unknown";
}

const PartDecl* ArtProgram::find_part(std::string_view name) const {
  for (const auto& p : parts) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

namespace {

enum class Tok { word, string, number, semicolon, end };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  SourceLocation loc;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space_and_comments();
      const SourceLocation loc{line_, col_};
      if (pos_ >= src_.size()) {
        out.push_back({Tok::end, "", 0.0, loc});
        return out;
      }
      const char c = src_[pos_];
      if (c == ';') {
        advance();
        out.push_back({Tok::semicolon, ";", 0.0, loc});
      } else if (c == '"') {
        out.push_back(lex_string(loc));
      } else if ((c == '+' || c == '-') && pos_ + 1 < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_ + 1]))) {
        std::string text(1, c);
        advance();
        while (pos_ < src_.size() && is_word_char(src_[pos_])) text += advance();
        out.push_back({Tok::word, text, 0.0, loc});
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.') {
        out.push_back(lex_number(loc));
      } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::string text;
        while (pos_ < src_.size() && is_word_char(src_[pos_])) text += advance();
        out.push_back({Tok::word, text, 0.0, loc});
      } else {
        throw ArtlangError(ArtlangErrc::syntax, loc, std::string("unexpected character '") + c + "'");
      }
    }
  }

 private:
  static bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

  char advance() {
    const char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space_and_comments() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '#' || (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/')) {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token lex_string(SourceLocation loc) {
    advance();  // opening quote
    std::string text;
    for (;;) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') {
        throw ArtlangError(ArtlangErrc::syntax, loc, "unterminated string");
      }
      char c = advance();
      if (c == '"') break;
      if (c == '\\') {
        if (pos_ >= src_.size()) throw ArtlangError(ArtlangErrc::syntax, loc, "unterminated string");
        c = advance();
      }
      text += c;
    }
    return {Tok::string, text, 0.0, loc};
  }

  Token lex_number(SourceLocation loc) {
    std::string text;
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      const bool exp_sign = (c == '+' || c == '-') && !text.empty() && (text.back() == 'e' || text.back() == 'E');
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == 'e' || c == 'E' || exp_sign ||
          ((c == '+' || c == '-') && text.empty())) {
        text += advance();
      } else {
        break;
      }
    }
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) {
      throw ArtlangError(ArtlangErrc::syntax, loc, "malformed number '" + text + "'");
    }
    return {Tok::number, text, v, loc};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

  ArtProgram run() {
    ArtProgram program;
    while (peek().kind != Tok::end) {
      const Token& kw = expect_word("a statement keyword ('part', 'place' or 'joint')");
      if (kw.text == "part") {
        program.parts.push_back(parse_part(kw.loc));
      } else if (kw.text == "place") {
        program.statements.emplace_back(parse_place(kw.loc));
      } else if (kw.text == "joint") {
        program.statements.emplace_back(parse_joint(kw.loc));
      } else {
        throw ArtlangError(ArtlangErrc::syntax, kw.loc, "unknown statement '" + kw.text + "'");
      }
    }
    return program;
  }

 private:
  const Token& peek() const { return toks_[i_]; }
  const Token& next() {
    const Token& t = toks_[i_];
    if (t.kind != Tok::end) ++i_;
    return t;
  }

  [[noreturn]] void fail(const Token& t, const std::string& expected) {
    const std::string got = t.kind == Tok::end ? "end of input" : "'" + t.text + "'";
    throw ArtlangError(ArtlangErrc::syntax, t.loc, "expected " + expected + ", found " + got);
  }

  const Token& expect_word(const std::string& what) {
    if (peek().kind != Tok::word) fail(peek(), what);
    return next();
  }

  void expect_keyword(const char* kw) {
    if (peek().kind != Tok::word || peek().text != kw) fail(peek(), std::string("'") + kw + "'");
    next();
  }

  std::string expect_ident(const std::string& what) {
    const Token& t = expect_word(what);
    if (!std::isalpha(static_cast<unsigned char>(t.text[0])) && t.text[0] != '_') fail(t, what);
    return t.text;
  }

  double expect_number(const std::string& what) {
    if (peek().kind != Tok::number) fail(peek(), what);
    return next().number;
  }

  Vec3 expect_vec3(const std::string& what) {
    const double x = expect_number(what);
    const double y = expect_number(what);
    const double z = expect_number(what);
    return {x, y, z};
  }

  void expect_semicolon() {
    if (peek().kind != Tok::semicolon) fail(peek(), "';'");
    next();
  }

  // Optional clauses: each keyword at most once, in any order.
  template <typename Handler>
  void clauses(std::set<std::string> allowed, Handler&& handle) {
    std::set<std::string> seen;
    while (peek().kind != Tok::semicolon) {
      const Token& t = peek();
      if (t.kind != Tok::word || !allowed.contains(t.text)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "'" : ", '") + a + "'";
        fail(t, "one of " + list + " or ';'");
      }
      if (!seen.insert(t.text).second) {
        throw ArtlangError(ArtlangErrc::syntax, t.loc, "clause '" + t.text + "' given twice");
      }
      const Token& kw = next();
      handle(kw);
    }
    expect_semicolon();
  }

  PartDecl parse_part(SourceLocation loc) {
    PartDecl d;
    d.location = loc;
    d.name = expect_ident("a part name");
    if (peek().kind != Tok::string) fail(peek(), "a quoted mesh path");
    d.mesh_ref = next().text;
    clauses({"scale"}, [&](const Token& kw) {
      d.scale = expect_vec3("three scale factors");
      if (!(d.scale.x > 0 && d.scale.y > 0 && d.scale.z > 0)) {
        throw ArtlangError(ArtlangErrc::invalid_value, kw.loc, "scale factors must be positive");
      }
    });
    return d;
  }

  PlaceStmt parse_place(SourceLocation loc) {
    PlaceStmt s;
    s.location = loc;
    s.child = expect_ident("the part to place");
    expect_keyword("on");
    s.parent = expect_ident("the part to place on");
    expect_keyword("axis");
    const Token& axis = next();
    const auto parsed = place_axis_from_string(axis.text);
    if (axis.kind != Tok::word || !parsed) {
      throw ArtlangError(ArtlangErrc::invalid_axis, axis.loc,
                         "invalid placement axis '" + axis.text + "' (use +x, -x, +y, -y, +z or -z)");
    }
    s.axis = *parsed;
    clauses({"offset", "clearance"}, [&](const Token& kw) {
      if (kw.text == "offset") {
        s.lateral_offset = expect_vec3("three offset components");
      } else {
        s.clearance = expect_number("a clearance in meters");
        if (s.clearance < 0) throw ArtlangError(ArtlangErrc::invalid_value, kw.loc, "clearance must be >= 0");
      }
    });
    return s;
  }

  JointStmt parse_joint(SourceLocation loc) {
    JointStmt s;
    s.location = loc;
    s.child = expect_ident("the child part");
    expect_keyword("to");
    s.parent = expect_ident("the parent part");
    const Token& kind = expect_word("a joint kind (prismatic, revolute or fixed)");
    const auto parsed = joint_kind_from_string(kind.text);
    if (!parsed) fail(kind, "a joint kind (prismatic, revolute or fixed)");
    s.kind = *parsed;
    bool has_axis = false;
    bool has_limit = false;
    clauses({"axis", "pivot", "limit"}, [&](const Token& kw) {
      if (kw.text == "axis") {
        s.global_axis = expect_vec3("three axis components");
        has_axis = true;
      } else if (kw.text == "pivot") {
        s.global_pivot = expect_vec3("three pivot coordinates");
      } else {
        s.limit.lower = expect_number("a lower limit");
        s.limit.upper = expect_number("an upper limit");
        has_limit = true;
        if (s.limit.lower > s.limit.upper) {
          throw ArtlangError(ArtlangErrc::invalid_value, kw.loc, "lower limit exceeds upper limit");
        }
      }
    });
    if (s.kind != JointKind::fixed) {
      if (!has_axis || !(s.global_axis.norm() > 1e-12)) {
        throw ArtlangError(ArtlangErrc::invalid_value, loc, "a moving joint needs a non-zero 'axis'");
      }
      if (!has_limit) throw ArtlangError(ArtlangErrc::invalid_value, loc, "a moving joint needs a 'limit'");
    }
    return s;
  }

  std::vector<Token> toks_;
  std::size_t i_ = 0;
};

void check_semantics(const ArtProgram& program) {
  std::set<std::string, std::less<>> declared;
  for (const auto& p : program.parts) {
    if (!declared.insert(p.name).second) {
      throw ArtlangError(ArtlangErrc::duplicate_part, p.location, "part '" + p.name + "' declared twice");
    }
  }
  auto require = [&](const std::string& name, const SourceLocation& loc) {
    if (!declared.contains(name)) {
      throw ArtlangError(ArtlangErrc::undeclared_part, loc, "part '" + name + "' is not declared");
    }
  };
  std::set<std::string, std::less<>> placed;
  std::set<std::string, std::less<>> jointed;
  for (const auto& stmt : program.statements) {
    std::visit(
        [&](const auto& s) {
          require(s.child, s.location);
          require(s.parent, s.location);
          if (s.child == s.parent) {
            throw ArtlangError(ArtlangErrc::invalid_value, s.location, "part '" + s.child + "' refers to itself");
          }
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, PlaceStmt>) {
            if (!placed.insert(s.child).second) {
              throw ArtlangError(ArtlangErrc::duplicate_placement, s.location,
                                 "part '" + s.child + "' is placed twice");
            }
          } else {
            if (!jointed.insert(s.child).second) {
              throw ArtlangError(ArtlangErrc::duplicate_joint, s.location,
                                 "part '" + s.child + "' already has a joint");
            }
          }
        },
        stmt);
  }
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string fmt3(const Vec3& v) { return format_real(v.x) + " " + format_real(v.y) + " " + format_real(v.z); }

}  // namespace

ArtProgram parse_artlang(std::string_view source) {
  ArtProgram program = Parser(Lexer(source).run()).run();
  check_semantics(program);
  return program;
}

std::string pretty_print(const ArtProgram& program) {
  std::ostringstream out;
  for (const auto& p : program.parts) {
    out << "part " << p.name << ' ' << quote(p.mesh_ref);
    if (!(p.scale == Vec3{1.0, 1.0, 1.0})) out << " scale " << fmt3(p.scale);
    out << ";\n";
  }
  for (const auto& stmt : program.statements) {
    if (const auto* s = std::get_if<PlaceStmt>(&stmt)) {
      out << "place " << s->child << " on " << s->parent << " axis " << to_string(s->axis);
      if (!(s->lateral_offset == Vec3{})) out << " offset " << fmt3(s->lateral_offset);
      if (s->clearance != 0.0) out << " clearance " << format_real(s->clearance);
    } else {
      const auto& j = std::get<JointStmt>(stmt);
      out << "joint " << j.child << " to " << j.parent << ' ' << to_string(j.kind);
      if (j.kind != JointKind::fixed) out << " axis " << fmt3(j.global_axis);
      if (j.global_pivot) out << " pivot " << fmt3(*j.global_pivot);
      if (j.kind != JointKind::fixed) {
        out << " limit " << format_real(j.limit.lower) << ' ' << format_real(j.limit.upper);
      }
    }
    out << ";\n";
  }
  return out.str();
}

}  // namespace artkit
