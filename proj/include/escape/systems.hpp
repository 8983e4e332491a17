#pragma once

#include <optional>
#include <string>
#include <vector>

#include "escape/escape.hpp"
#include "escape/names.hpp"

namespace escape {

// Half-space N.x <= D with rational data.
struct Halfspace {
  std::vector<mpq_class> normal;
  mpq_class offset;
};

// x |-> Ax + b iterated inside the polyhedron cut out by the halfspaces.
struct AffineSystem {
  int dim = 1;
  std::vector<std::vector<mpq_class>> a;  // d x d, row major
  std::vector<mpq_class> b;               // d
  std::vector<Halfspace> halfspaces;      // at least one, normals nonzero
  std::vector<mpq_class> x0;              // d

  void validate() const;  // throws on structural problems
};

struct QuadraticParameter {
  mpq_class re;
  mpq_class im;
};

// All norms below are sup-norm; it matches the grid geometry and keeps every
// compactified formula inside the min/max/abs/div expression grammar.

// Phi(x) = x / (1 + ||x||), exact; maps R^d onto the open unit ball.
std::vector<mpq_class> compactify_point(const std::vector<mpq_class>& x);

// The bounded extension of Phi . f_{A,b} . Phi^{-1}:
//   fbar(x) = (Ax + (1-m) b) / (||Ax + (1-m) b|| + 1 - m),  m = min(1, ||x||).
std::vector<ExprPtr> compactified_map_components(const AffineSystem& sys);
FunctionName build_compactified_map(const AffineSystem& sys);

// Constraints N.x - D (1 - min(1, ||x||)) <= 0 describing the compactified
// polyhedron.
std::vector<ExprPtr> compactified_polyhedron_constraints(const AffineSystem& sys);
ClosedSetName build_compactified_polyhedron(const AffineSystem& sys);

struct ReducedInstance {
  FunctionName function;
  ClosedSetName set;
  PointName point;
};

// The full reduction (fbar, Phat, Phi(x0)), ready for point_escape.
ReducedInstance reduce_affine(const AffineSystem& sys);

// Raw (uncompactified) instance; the map Ax+b and the halfspaces as-is.
// Useful to demonstrate why the compactification is needed.
ReducedInstance raw_affine_instance(const AffineSystem& sys);

// ---- advisory spectral classifier ---------------------------------------------

// Floating-point classification of trapped robustness for affine systems.
// Advisory only: explicit tolerance bands, Undetermined near any decision
// boundary, never part of a certificate.
struct RobustnessClass {
  enum class Kind { RobustTrapped, Escaping, NotRobust, Undetermined };
  Kind kind = Kind::Undetermined;
  int trapped_case = 0;  // 1, 2 or 3 when kind == RobustTrapped
  std::string detail;
  bool advisory = true;
};

RobustnessClass classify_affine(const AffineSystem& sys, double tolerance = 1e-9);

// ---- quadratic family ----------------------------------------------------------

// c = a+ib maps to the instance (g_c, closed sup-ball of radius 3, origin)
// with g_c(x,y) = (x^2 - y^2 + a, 2xy + b).
std::vector<ExprPtr> quadratic_map_components(const QuadraticParameter& c);
ReducedInstance mandelbrot_reduce(const QuadraticParameter& c);

// Critical-orbit cycle detector at double precision; test oracle only, never
// part of a certificate. Returns the minimal period and the cycle multiplier
// magnitude |prod 2 z_i| when a cycle is found within the budgets.
struct AttractingCycle {
  int period = 0;
  double multiplier = 0.0;
};
std::optional<AttractingCycle> attracting_cycle_oracle(const QuadraticParameter& c,
                                                       int max_iter = 20000,
                                                       int period_bound = 64,
                                                       double tol = 1e-9);

// Sound escape probe: iterates g_c from the origin in adaptive-precision
// outward-rounded interval arithmetic and reports the first step whose
// enclosure lies strictly outside the sup-ball of the given radius, if that
// happens within max_steps.
std::optional<int> certified_escape_step(const QuadraticParameter& c, int max_steps,
                                         long radius = 3);

// Blend perturbation: equals `target` at `center`, equals the original map
// outside the sup-ball of the given radius around it:
//   x |-> t y + (1 - t) f(x),  t = max(0, 1 - ||x - center|| / radius).
std::vector<ExprPtr> perturb_toward(const std::vector<ExprPtr>& components,
                                    const std::vector<mpq_class>& center,
                                    const mpq_class& radius,
                                    const std::vector<mpq_class>& target);

// Exact affine orbit step, for test oracles.
std::vector<mpq_class> affine_step(const AffineSystem& sys, const std::vector<mpq_class>& x);
bool point_in_polyhedron(const AffineSystem& sys, const std::vector<mpq_class>& x);

}  // namespace escape
