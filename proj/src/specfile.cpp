#include "escape/specfile.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace escape {

namespace {

bool is_keyword(const std::string& tok) {
  return tok == "dimension" || tok == "map" || tok == "set" || tok == "point" ||
         tok == "matrix" || tok == "offset" || tok == "halfspaces";
}

int parse_dimension(SexprParser& p) {
  std::string tok = p.next_token();
  if (tok != "dimension")
    throw ParseError{p.line(), p.column(), "file must start with 'dimension'"};
  std::string v = p.next_token();
  try {
    int d = std::stoi(v);
    if (d < 1 || d > kMaxDim) throw std::out_of_range("");
    return d;
  } catch (...) {
    throw ParseError{p.line(), p.column(), "bad dimension '" + v + "'"};
  }
}

mpq_class parse_rational_at(SexprParser& p) {
  int line = p.line(), col = p.column();
  std::string tok = p.next_token();
  try {
    return parse_rational_token(tok);
  } catch (const ParseError& e) {
    throw ParseError{line, col, e.message};
  }
}

}  // namespace

SystemSpec parse_system_spec(std::string_view text) {
  SexprParser p(text);
  SystemSpec spec;
  spec.dim = parse_dimension(p);
  bool saw_map = false, saw_set = false, saw_point = false;

  while (!p.at_end()) {
    int line = p.line(), col = p.column();
    std::string section = p.next_token();
    if (section == "map") {
      if (saw_map) throw ParseError{line, col, "duplicate section 'map'"};
      for (int i = 0; i < spec.dim; ++i) {
        ExprPtr e = p.next();
        if (!e) throw ParseError{p.line(), p.column(), "map needs one expression per axis"};
        if (e->max_var_index() > spec.dim)
          throw ParseError{line, col, "map expression mentions a variable beyond the dimension"};
        spec.map_components.push_back(std::move(e));
      }
      saw_map = true;
    } else if (section == "set") {
      if (saw_set) throw ParseError{line, col, "duplicate section 'set'"};
      while (true) {
        auto tok = p.peek_token();
        if (!tok || is_keyword(*tok)) break;
        ExprPtr e = p.next();
        if (e->max_var_index() > spec.dim)
          throw ParseError{line, col, "set constraint mentions a variable beyond the dimension"};
        spec.set_constraints.push_back(std::move(e));
      }
      saw_set = true;
    } else if (section == "point") {
      if (saw_point) throw ParseError{line, col, "duplicate section 'point'"};
      for (int i = 0; i < spec.dim; ++i) spec.point.push_back(parse_rational_at(p));
      saw_point = true;
    } else {
      throw ParseError{line, col, "unknown section '" + section + "'"};
    }
  }
  if (!saw_map) throw ParseError{0, 0, "missing section 'map'"};
  if (!saw_set) throw ParseError{0, 0, "missing section 'set'"};
  if (!saw_point) throw ParseError{0, 0, "missing section 'point'"};
  return spec;
}

std::string serialize_system_spec(const SystemSpec& spec) {
  std::ostringstream os;
  os << "dimension " << spec.dim << "\n";
  os << "map\n";
  for (const auto& e : spec.map_components) os << "  " << to_sexpr(*e) << "\n";
  os << "set\n";
  for (const auto& e : spec.set_constraints) os << "  " << to_sexpr(*e) << "\n";
  os << "point";
  for (const auto& r : spec.point)
    os << " " << r.get_num().get_str() << "/" << r.get_den().get_str();
  os << "\n";
  return os.str();
}

ReducedInstance instance_from_spec(const SystemSpec& spec) {
  return ReducedInstance{FunctionName::from_components(spec.map_components),
                         ClosedSetName::from_constraints(spec.dim, spec.set_constraints),
                         PointName(spec.point)};
}

AffineSystem parse_affine_file(std::string_view text) {
  SexprParser p(text);
  AffineSystem sys;
  sys.dim = parse_dimension(p);
  bool saw_matrix = false, saw_offset = false, saw_half = false, saw_point = false;

  while (!p.at_end()) {
    int line = p.line(), col = p.column();
    std::string section = p.next_token();
    if (section == "matrix") {
      if (saw_matrix) throw ParseError{line, col, "duplicate section 'matrix'"};
      sys.a.assign(sys.dim, {});
      for (int i = 0; i < sys.dim; ++i)
        for (int j = 0; j < sys.dim; ++j) sys.a[i].push_back(parse_rational_at(p));
      saw_matrix = true;
    } else if (section == "offset") {
      if (saw_offset) throw ParseError{line, col, "duplicate section 'offset'"};
      for (int i = 0; i < sys.dim; ++i) sys.b.push_back(parse_rational_at(p));
      saw_offset = true;
    } else if (section == "halfspaces") {
      if (saw_half) throw ParseError{line, col, "duplicate section 'halfspaces'"};
      while (true) {
        auto tok = p.peek_token();
        if (!tok || is_keyword(*tok)) break;
        Halfspace h;
        for (int j = 0; j < sys.dim; ++j) h.normal.push_back(parse_rational_at(p));
        std::string sep = p.next_token();
        if (sep != ";")
          throw ParseError{p.line(), p.column(), "expected ';' between normal and offset"};
        h.offset = parse_rational_at(p);
        sys.halfspaces.push_back(std::move(h));
      }
      saw_half = true;
    } else if (section == "point") {
      if (saw_point) throw ParseError{line, col, "duplicate section 'point'"};
      for (int i = 0; i < sys.dim; ++i) sys.x0.push_back(parse_rational_at(p));
      saw_point = true;
    } else {
      throw ParseError{line, col, "unknown section '" + section + "'"};
    }
  }
  if (!saw_matrix) throw ParseError{0, 0, "missing section 'matrix'"};
  if (!saw_offset) throw ParseError{0, 0, "missing section 'offset'"};
  if (!saw_half) throw ParseError{0, 0, "missing section 'halfspaces'"};
  if (!saw_point) throw ParseError{0, 0, "missing section 'point'"};
  try {
    sys.validate();
  } catch (const std::exception& e) {
    throw ParseError{0, 0, e.what()};
  }
  return sys;
}

std::string serialize_affine_file(const AffineSystem& sys) {
  auto rat = [](const mpq_class& q) {
    return q.get_num().get_str() + "/" + q.get_den().get_str();
  };
  std::ostringstream os;
  os << "dimension " << sys.dim << "\n";
  os << "matrix\n";
  for (const auto& row : sys.a) {
    os << " ";
    for (const auto& v : row) os << " " << rat(v);
    os << "\n";
  }
  os << "offset";
  for (const auto& v : sys.b) os << " " << rat(v);
  os << "\nhalfspaces\n";
  for (const auto& h : sys.halfspaces) {
    os << " ";
    for (const auto& v : h.normal) os << " " << rat(v);
    os << " ; " << rat(h.offset) << "\n";
  }
  os << "point";
  for (const auto& v : sys.x0) os << " " << rat(v);
  os << "\n";
  return os.str();
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const std::string& path, std::string_view s) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp);
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
    if (!out) throw std::runtime_error("short write: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot move " + tmp + " into place");
  }
}

}  // namespace escape
