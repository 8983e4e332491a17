#pragma once

#include <string>

#include "escape/systems.hpp"

namespace escape {

// System spec file: sections `dimension`, `map`, `set`, `point`.
//   dimension d
//   map    <d s-expressions>
//   set    <zero or more constraint s-expressions>
//   point  <d rationals p/q>
// `dimension` must come first; the other sections may appear in any order,
// each exactly once. `#` starts a comment. The set is {x : g_i(x) <= 0}.
struct SystemSpec {
  int dim = 1;
  std::vector<ExprPtr> map_components;
  std::vector<ExprPtr> set_constraints;
  std::vector<mpq_class> point;
};

SystemSpec parse_system_spec(std::string_view text);  // throws ParseError
std::string serialize_system_spec(const SystemSpec& spec);

ReducedInstance instance_from_spec(const SystemSpec& spec);

// Affine system file: sections `dimension`, `matrix` (row-major rationals),
// `offset`, `halfspaces` (lines "n_1 ... n_d ; D"), `point`.
AffineSystem parse_affine_file(std::string_view text);  // throws ParseError
std::string serialize_affine_file(const AffineSystem& sys);

std::string read_text_file(const std::string& path);               // throws runtime_error
void write_text_file(const std::string& path, std::string_view s); // atomic-ish via rename

}  // namespace escape
