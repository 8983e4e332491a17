#include "escape/systems.hpp"

#include <complex>
#include <sstream>
#include <stdexcept>

namespace escape {

void AffineSystem::validate() const {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("affine dimension out of range");
  if (static_cast<int>(a.size()) != dim) throw std::invalid_argument("matrix row count != dim");
  for (const auto& row : a)
    if (static_cast<int>(row.size()) != dim)
      throw std::invalid_argument("matrix column count != dim");
  if (static_cast<int>(b.size()) != dim) throw std::invalid_argument("offset size != dim");
  if (static_cast<int>(x0.size()) != dim) throw std::invalid_argument("point size != dim");
  if (halfspaces.empty()) throw std::invalid_argument("polyhedron needs at least one halfspace");
  for (const auto& h : halfspaces) {
    if (static_cast<int>(h.normal.size()) != dim)
      throw std::invalid_argument("halfspace normal size != dim");
    bool nonzero = false;
    for (const auto& v : h.normal)
      if (sgn(v) != 0) nonzero = true;
    if (!nonzero) throw std::invalid_argument("halfspace normal must be nonzero");
  }
}

std::vector<mpq_class> compactify_point(const std::vector<mpq_class>& x) {
  mpq_class denom = 1 + rational_sup_norm(x);
  std::vector<mpq_class> out;
  out.reserve(x.size());
  for (const auto& xi : x) out.push_back(mpq_class(xi / denom));
  return out;
}

namespace {

ExprPtr sup_norm_expr(int dim) {
  std::vector<ExprPtr> parts;
  for (int i = 1; i <= dim; ++i) parts.push_back(ex::abs(ex::var(i)));
  return ex::max(std::move(parts));
}

// min(1, ||x||)
ExprPtr clipped_norm_expr(int dim) {
  return ex::min({ex::constant(1), sup_norm_expr(dim)});
}

// sum_j a_j * x_j + extra, skipping zero coefficients.
ExprPtr affine_row_expr(const std::vector<mpq_class>& row, ExprPtr extra) {
  ExprPtr acc = std::move(extra);
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (sgn(row[j]) == 0) continue;
    ExprPtr term = row[j] == 1 ? ex::var(static_cast<int>(j + 1))
                               : ex::mul(ex::constant(row[j]), ex::var(static_cast<int>(j + 1)));
    acc = acc ? ex::add(std::move(acc), std::move(term)) : std::move(term);
  }
  return acc ? acc : ex::constant(0);
}

}  // namespace

std::vector<ExprPtr> compactified_map_components(const AffineSystem& sys) {
  sys.validate();
  const int d = sys.dim;
  ExprPtr m = clipped_norm_expr(d);
  ExprPtr one_minus_m = ex::sub(ex::constant(1), m);

  std::vector<ExprPtr> numerators;
  numerators.reserve(d);
  for (int i = 0; i < d; ++i) {
    ExprPtr extra;
    if (sgn(sys.b[i]) != 0)
      extra = ex::mul(one_minus_m, ex::constant(sys.b[i]));
    numerators.push_back(affine_row_expr(sys.a[i], std::move(extra)));
  }

  std::vector<ExprPtr> abs_nums;
  for (const auto& nu : numerators) abs_nums.push_back(ex::abs(nu));
  ExprPtr denom = ex::add(ex::max(std::move(abs_nums)), one_minus_m);

  std::vector<ExprPtr> out;
  out.reserve(d);
  for (auto& nu : numerators) out.push_back(ex::div(std::move(nu), denom));
  return out;
}

FunctionName build_compactified_map(const AffineSystem& sys) {
  return FunctionName::from_components(compactified_map_components(sys));
}

std::vector<ExprPtr> compactified_polyhedron_constraints(const AffineSystem& sys) {
  sys.validate();
  ExprPtr one_minus_m = ex::sub(ex::constant(1), clipped_norm_expr(sys.dim));
  std::vector<ExprPtr> out;
  out.reserve(sys.halfspaces.size());
  for (const auto& h : sys.halfspaces) {
    ExprPtr nx = affine_row_expr(h.normal, nullptr);
    ExprPtr rhs;
    if (sgn(h.offset) != 0) rhs = ex::mul(ex::constant(h.offset), one_minus_m);
    out.push_back(rhs ? ex::sub(std::move(nx), std::move(rhs)) : std::move(nx));
  }
  return out;
}

ClosedSetName build_compactified_polyhedron(const AffineSystem& sys) {
  return ClosedSetName::from_constraints(sys.dim, compactified_polyhedron_constraints(sys));
}

ReducedInstance reduce_affine(const AffineSystem& sys) {
  return ReducedInstance{build_compactified_map(sys), build_compactified_polyhedron(sys),
                         PointName(compactify_point(sys.x0))};
}

ReducedInstance raw_affine_instance(const AffineSystem& sys) {
  sys.validate();
  std::vector<ExprPtr> comps;
  for (int i = 0; i < sys.dim; ++i) {
    ExprPtr extra = sgn(sys.b[i]) != 0 ? ex::constant(sys.b[i]) : nullptr;
    comps.push_back(affine_row_expr(sys.a[i], std::move(extra)));
  }
  std::vector<ExprPtr> constraints;
  for (const auto& h : sys.halfspaces) {
    constraints.push_back(
        ex::sub(affine_row_expr(h.normal, nullptr), ex::constant(h.offset)));
  }
  return ReducedInstance{FunctionName::from_components(std::move(comps)),
                         ClosedSetName::from_constraints(sys.dim, std::move(constraints)),
                         PointName(sys.x0)};
}

// ---- quadratic family ------------------------------------------------------------

std::vector<ExprPtr> quadratic_map_components(const QuadraticParameter& c) {
  ExprPtr x = ex::var(1), y = ex::var(2);
  ExprPtr re = ex::sub(ex::mul(x, x), ex::mul(y, y));
  if (sgn(c.re) != 0) re = ex::add(std::move(re), ex::constant(c.re));
  ExprPtr im = ex::mul(ex::constant(2), ex::mul(x, y));
  if (sgn(c.im) != 0) im = ex::add(std::move(im), ex::constant(c.im));
  return {std::move(re), std::move(im)};
}

ReducedInstance mandelbrot_reduce(const QuadraticParameter& c) {
  // Closed sup-ball of radius 3: max(|x|, |y|) - 3 <= 0. Any orbit leaving it
  // has modulus above 3 > 2 in some coordinate, hence diverges.
  ExprPtr g = ex::sub(sup_norm_expr(2), ex::constant(3));
  return ReducedInstance{FunctionName::from_components(quadratic_map_components(c)),
                         ClosedSetName::from_constraints(2, {std::move(g)}),
                         PointName({mpq_class(0), mpq_class(0)})};
}

std::optional<AttractingCycle> attracting_cycle_oracle(const QuadraticParameter& c,
                                                       int max_iter, int period_bound,
                                                       double tol) {
  const std::complex<double> cc(c.re.get_d(), c.im.get_d());
  std::complex<double> z(0.0, 0.0);
  const int burn_in = std::max(256, max_iter / 2);
  std::vector<std::complex<double>> tail;
  for (int i = 0; i < max_iter; ++i) {
    z = z * z + cc;
    if (std::abs(z) > 4.0) return std::nullopt;  // escaped, no cycle
    if (i >= burn_in) tail.push_back(z);
  }
  if (tail.size() < static_cast<std::size_t>(2 * period_bound + 2)) return std::nullopt;

  // Detect near-periodicity at the end of the tail.
  const std::complex<double> last = tail.back();
  int period = 0;
  double detect_tol = std::max(tol, 1e-6);
  for (int p = 1; p <= period_bound; ++p) {
    if (std::abs(tail[tail.size() - 1 - p] - last) < detect_tol) {
      period = p;
      break;
    }
  }
  if (period == 0) return std::nullopt;

  // Refine a cycle point by Newton iteration on f^p(w) - w.
  std::complex<double> w = last;
  for (int it = 0; it < 64; ++it) {
    std::complex<double> v = w, dv(1.0, 0.0);
    for (int p = 0; p < period; ++p) {
      dv = 2.0 * v * dv;
      v = v * v + cc;
    }
    std::complex<double> g = v - w;
    std::complex<double> dg = dv - 1.0;
    if (std::abs(dg) < 1e-14) break;
    std::complex<double> step = g / dg;
    w -= step;
    if (std::abs(step) < 1e-15) break;
  }

  // Multiplier along the refined cycle; reduce to the minimal period.
  auto multiplier_for = [&](int p) {
    std::complex<double> v = w, m(1.0, 0.0);
    for (int i = 0; i < p; ++i) {
      m *= 2.0 * v;
      v = v * v + cc;
    }
    return std::make_pair(std::abs(m), v);
  };
  int minimal = period;
  for (int p = 1; p < period; ++p) {
    if (period % p != 0) continue;
    auto [m, v] = multiplier_for(p);
    if (std::abs(v - w) < detect_tol) {
      minimal = p;
      break;
    }
  }
  auto [mult, v] = multiplier_for(minimal);
  if (std::abs(v - w) > 1e-5) return std::nullopt;  // Newton did not settle
  return AttractingCycle{minimal, mult};
}

std::optional<int> certified_escape_step(const QuadraticParameter& c, int max_steps,
                                         long radius) {
  // Iterate with degenerate-start interval arithmetic; double the working
  // precision until the verdict is reached or the enclosure blows up at the
  // final precision.
  for (long prec = 64; prec <= 8192; prec *= 2) {
    Dyadic cre_lo = Dyadic::round_down(c.re, prec), cre_hi = Dyadic::round_up(c.re, prec);
    Dyadic cim_lo = Dyadic::round_down(c.im, prec), cim_hi = Dyadic::round_up(c.im, prec);
    DyadicInterval zx = DyadicInterval::point(Dyadic(0));
    DyadicInterval zy = DyadicInterval::point(Dyadic(0));
    const Dyadic bound(radius);
    bool widened = false;
    for (int step = 1; step <= max_steps; ++step) {
      DyadicInterval nx = iv_add(iv_sub(iv_mul(zx, zx), iv_mul(zy, zy)),
                                 DyadicInterval(cre_lo, cre_hi));
      DyadicInterval ny = iv_add(iv_mul(DyadicInterval(Dyadic(2), Dyadic(2)), iv_mul(zx, zy)),
                                 DyadicInterval(cim_lo, cim_hi));
      // Round outward to the working precision to keep mantissas short.
      zx = DyadicInterval(Dyadic(nx.lo.floor_scaled(prec), -prec),
                          Dyadic(nx.hi.ceil_scaled(prec), -prec));
      zy = DyadicInterval(Dyadic(ny.lo.floor_scaled(prec), -prec),
                          Dyadic(ny.hi.ceil_scaled(prec), -prec));
      DyadicInterval sup = iv_max(iv_abs(zx), iv_abs(zy));
      if (sup.lo > bound) return step;  // certainly outside the sup-ball
      if (sup.width() > Dyadic(1)) {
        widened = true;  // not tight enough to continue at this precision
        break;
      }
    }
    if (!widened) return std::nullopt;  // ran max_steps with a tight orbit, no exit
  }
  return std::nullopt;
}

std::vector<ExprPtr> perturb_toward(const std::vector<ExprPtr>& components,
                                    const std::vector<mpq_class>& center,
                                    const mpq_class& radius,
                                    const std::vector<mpq_class>& target) {
  if (components.size() != center.size() || components.size() != target.size())
    throw std::invalid_argument("perturb_toward: dimension mismatch");
  if (sgn(radius) <= 0) throw std::invalid_argument("perturb_toward: radius must be positive");
  const int d = static_cast<int>(components.size());

  // t = max(0, 1 - ||x - center|| / radius)
  std::vector<ExprPtr> dist_parts;
  for (int i = 0; i < d; ++i) {
    ExprPtr diff = sgn(center[i]) == 0
                       ? ex::var(i + 1)
                       : ex::sub(ex::var(i + 1), ex::constant(center[i]));
    dist_parts.push_back(ex::abs(std::move(diff)));
  }
  ExprPtr scaled = ex::mul(ex::constant(mpq_class(1 / radius)), ex::max(std::move(dist_parts)));
  ExprPtr t = ex::max({ex::constant(0), ex::sub(ex::constant(1), std::move(scaled))});
  ExprPtr one_minus_t = ex::sub(ex::constant(1), t);

  std::vector<ExprPtr> out;
  out.reserve(d);
  for (int i = 0; i < d; ++i) {
    ExprPtr blended = ex::mul(one_minus_t, components[i]);
    if (sgn(target[i]) != 0)
      blended = ex::add(ex::mul(t, ex::constant(target[i])), std::move(blended));
    out.push_back(std::move(blended));
  }
  return out;
}

std::vector<mpq_class> affine_step(const AffineSystem& sys, const std::vector<mpq_class>& x) {
  std::vector<mpq_class> out(sys.dim, mpq_class(0));
  for (int i = 0; i < sys.dim; ++i) {
    mpq_class acc = sys.b[i];
    for (int j = 0; j < sys.dim; ++j) acc += sys.a[i][j] * x[j];
    out[i] = acc;
  }
  return out;
}

bool point_in_polyhedron(const AffineSystem& sys, const std::vector<mpq_class>& x) {
  for (const auto& h : sys.halfspaces) {
    mpq_class acc(0);
    for (int j = 0; j < sys.dim; ++j) acc += h.normal[j] * x[j];
    if (acc > h.offset) return false;
  }
  return true;
}

}  // namespace escape
