#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "escape/systems.hpp"

namespace escape {

namespace {

using Cplx = std::complex<double>;
using Mat = std::vector<std::vector<double>>;

// Exact characteristic polynomial lambda^d + c[1] lambda^(d-1) + ... + c[d]
// by the trace recursion; rational arithmetic so the boundary tests below
// (is 1 an eigenvalue, |det| >= 1) are exact, not banded.
std::vector<mpq_class> char_poly_exact(const AffineSystem& sys) {
  const int d = sys.dim;
  std::vector<std::vector<mpq_class>> m(d, std::vector<mpq_class>(d, mpq_class(0)));
  for (int i = 0; i < d; ++i) m[i][i] = 1;
  std::vector<mpq_class> c(d + 1, mpq_class(0));
  c[0] = 1;
  for (int k = 1; k <= d; ++k) {
    // m = A * m (from the previous step), then trace/k gives -c[k].
    std::vector<std::vector<mpq_class>> am(d, std::vector<mpq_class>(d, mpq_class(0)));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        mpq_class acc(0);
        for (int t = 0; t < d; ++t) acc += sys.a[i][t] * m[t][j];
        am[i][j] = acc;
      }
    mpq_class tr(0);
    for (int i = 0; i < d; ++i) tr += am[i][i];
    c[k] = mpq_class(-tr / k);
    for (int i = 0; i < d; ++i) am[i][i] += c[k];
    m = std::move(am);
  }
  return c;
}

mpq_class poly_eval_exact(const std::vector<mpq_class>& c, const mpq_class& x) {
  mpq_class acc(0);
  for (const auto& ci : c) acc = acc * x + ci;
  return acc;
}

mpq_class poly_derivative_eval_exact(const std::vector<mpq_class>& c, const mpq_class& x) {
  const int d = static_cast<int>(c.size()) - 1;
  mpq_class acc(0);
  for (int k = 0; k < d; ++k) acc = acc * x + mpq_class((d - k) * c[k]);
  return acc;
}

std::vector<Cplx> polynomial_roots(const std::vector<double>& coeffs, bool& converged) {
  const int d = static_cast<int>(coeffs.size()) - 1;
  std::vector<Cplx> z(d);
  Cplx seed(0.4, 0.9);
  Cplx acc(1.0, 0.0);
  for (int i = 0; i < d; ++i) {
    acc *= seed;
    z[i] = acc;
  }
  auto eval = [&](Cplx x) {
    Cplx r(coeffs[0], 0.0);
    for (int k = 1; k <= d; ++k) r = r * x + coeffs[k];
    return r;
  };
  converged = false;
  for (int iter = 0; iter < 500; ++iter) {
    double worst = 0.0;
    for (int i = 0; i < d; ++i) {
      Cplx denom(1.0, 0.0);
      for (int j = 0; j < d; ++j)
        if (j != i) denom *= z[i] - z[j];
      if (std::abs(denom) < 1e-300) denom = Cplx(1e-300, 0.0);
      Cplx delta = eval(z[i]) / denom;
      z[i] -= delta;
      worst = std::max(worst, std::abs(delta));
    }
    if (worst < 1e-13) {
      converged = true;
      break;
    }
  }
  return z;
}

// Null vector of a (numerically) singular matrix, unit sup-norm.
std::optional<std::vector<double>> null_vector(Mat m) {
  const int d = static_cast<int>(m.size());
  std::vector<int> pivot_col(d, -1);
  int row = 0;
  for (int col = 0; col < d && row < d; ++col) {
    int best = -1;
    double best_abs = 1e-8;  // smaller pivots count as zero
    for (int r = row; r < d; ++r) {
      if (std::abs(m[r][col]) > best_abs) {
        best = r;
        best_abs = std::abs(m[r][col]);
      }
    }
    if (best < 0) continue;
    std::swap(m[row], m[best]);
    double piv = m[row][col];
    for (int j = 0; j < d; ++j) m[row][j] /= piv;
    for (int r = 0; r < d; ++r) {
      if (r == row) continue;
      double f = m[r][col];
      if (f != 0.0) {
        for (int j = 0; j < d; ++j) m[r][j] -= f * m[row][j];
      }
    }
    pivot_col[row] = col;
    ++row;
  }
  int free_col = -1;
  for (int col = 0; col < d; ++col) {
    bool is_pivot = false;
    for (int r = 0; r < row; ++r)
      if (pivot_col[r] == col) is_pivot = true;
    if (!is_pivot) {
      free_col = col;
      break;
    }
  }
  if (free_col < 0) return std::nullopt;  // numerically nonsingular
  std::vector<double> v(d, 0.0);
  v[free_col] = 1.0;
  for (int r = 0; r < row; ++r) v[pivot_col[r]] = -m[r][free_col];
  double norm = 0.0;
  for (double x : v) norm = std::max(norm, std::abs(x));
  for (double& x : v) x /= norm;
  return v;
}

std::optional<std::vector<double>> solve_linear(Mat m, std::vector<double> rhs) {
  const int d = static_cast<int>(m.size());
  for (int col = 0; col < d; ++col) {
    int best = col;
    for (int r = col + 1; r < d; ++r)
      if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
    if (std::abs(m[best][col]) < 1e-12) return std::nullopt;
    std::swap(m[col], m[best]);
    std::swap(rhs[col], rhs[best]);
    for (int r = 0; r < d; ++r) {
      if (r == col) continue;
      double f = m[r][col] / m[col][col];
      if (f != 0.0) {
        for (int j = col; j < d; ++j) m[r][j] -= f * m[col][j];
        rhs[r] -= f * rhs[col];
      }
    }
  }
  for (int i = 0; i < d; ++i) rhs[i] /= m[i][i];
  return rhs;
}

enum class ProbeOutcome { Interior, Escaped, Boundary };

// Finite-horizon orbit check with relative margins. Interior is only a
// finite-horizon statement; the spectral conditions supply the tail.
ProbeOutcome orbit_interior_probe(const AffineSystem& sys, double tol, int horizon) {
  const int d = sys.dim;
  std::vector<double> x(d), b(d);
  Mat a(d, std::vector<double>(d));
  for (int i = 0; i < d; ++i) {
    x[i] = sys.x0[i].get_d();
    b[i] = sys.b[i].get_d();
    for (int j = 0; j < d; ++j) a[i][j] = sys.a[i][j].get_d();
  }
  std::vector<std::vector<double>> normals;
  std::vector<double> offsets;
  for (const auto& h : sys.halfspaces) {
    std::vector<double> n(d);
    double scale = 0.0;
    for (int j = 0; j < d; ++j) {
      n[j] = h.normal[j].get_d();
      scale = std::max(scale, std::abs(n[j]));
    }
    normals.push_back(std::move(n));
    offsets.push_back(h.offset.get_d());
  }

  std::vector<double> prev(d, 0.0);
  for (int k = 0; k <= horizon; ++k) {
    double xnorm = 0.0;
    for (double xi : x) xnorm = std::max(xnorm, std::abs(xi));
    bool receding = true;
    for (std::size_t h = 0; h < normals.size(); ++h) {
      double s = -offsets[h];
      for (int j = 0; j < d; ++j) s += normals[h][j] * x[j];
      double scale = 1.0 + xnorm + std::abs(offsets[h]);
      if (s > tol * scale) return ProbeOutcome::Escaped;
      if (s > -tol * scale) return ProbeOutcome::Boundary;
      if (s > -0.01 * scale) receding = false;
    }
    if (xnorm > 1e9) {
      // Diverging with every margin a solid fraction of the scale; the
      // spectral analysis owns the tail behaviour.
      return receding ? ProbeOutcome::Interior : ProbeOutcome::Boundary;
    }
    if (k > 0) {
      double step = 0.0;
      for (int i = 0; i < d; ++i) step = std::max(step, std::abs(x[i] - prev[i]));
      if (step < 1e-14 * (1.0 + xnorm)) return ProbeOutcome::Interior;  // settled
    }
    prev = x;
    std::vector<double> nx(d, 0.0);
    for (int i = 0; i < d; ++i) {
      double acc = b[i];
      for (int j = 0; j < d; ++j) acc += a[i][j] * x[j];
      nx[i] = acc;
    }
    x = std::move(nx);
  }
  return ProbeOutcome::Interior;
}

struct EigenData {
  std::vector<Cplx> roots;
  double spectral_radius = 0.0;
  bool ok = false;
};

EigenData eigenvalues(const std::vector<mpq_class>& charpoly) {
  EigenData e;
  std::vector<double> coeffs;
  for (const auto& c : charpoly) coeffs.push_back(c.get_d());
  bool converged = false;
  e.roots = polynomial_roots(coeffs, converged);
  if (!converged) return e;
  for (const auto& r : e.roots) e.spectral_radius = std::max(e.spectral_radius, std::abs(r));
  e.ok = true;
  return e;
}

RobustnessClass make(RobustnessClass::Kind k, int trapped_case, std::string detail) {
  RobustnessClass r;
  r.kind = k;
  r.trapped_case = trapped_case;
  r.detail = std::move(detail);
  return r;
}

}  // namespace

RobustnessClass classify_affine(const AffineSystem& sys, double tolerance) {
  sys.validate();
  const int d = sys.dim;
  const double tol = tolerance;

  if (!point_in_polyhedron(sys, sys.x0))
    return make(RobustnessClass::Kind::Escaping, 0, "initial point outside the polyhedron");

  switch (orbit_interior_probe(sys, tol, 20000)) {
    case ProbeOutcome::Escaped:
      return make(RobustnessClass::Kind::Escaping, 0, "orbit probe left the polyhedron");
    case ProbeOutcome::Boundary:
      return make(RobustnessClass::Kind::Undetermined, 0,
                  "orbit probe within tolerance of the boundary");
    case ProbeOutcome::Interior: break;
  }

  std::vector<mpq_class> cp = char_poly_exact(sys);
  EigenData eig = eigenvalues(cp);
  if (!eig.ok)
    return make(RobustnessClass::Kind::Undetermined, 0, "eigenvalue iteration did not settle");

  // Exact boundary facts.
  mpq_class det = cp[d];
  if (d % 2 == 1) det = -det;
  const bool det_rules_out_contraction = rational_abs(det) >= 1;
  const bool one_is_eigenvalue = sgn(poly_eval_exact(cp, mpq_class(1))) == 0;

  Mat a(d, std::vector<double>(d));
  std::vector<double> b(d), x0(d);
  for (int i = 0; i < d; ++i) {
    b[i] = sys.b[i].get_d();
    x0[i] = sys.x0[i].get_d();
    for (int j = 0; j < d; ++j) a[i][j] = sys.a[i][j].get_d();
  }

  // Case 1: spectral radius below one and the fixed point interior.
  if (!det_rules_out_contraction && !one_is_eigenvalue && eig.spectral_radius < 1.0 - tol) {
    Mat ia(d, std::vector<double>(d, 0.0));
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) ia[i][j] = (i == j ? 1.0 : 0.0) - a[i][j];
    auto fp = solve_linear(ia, b);
    if (!fp)
      return make(RobustnessClass::Kind::Undetermined, 0, "fixed-point solve near-singular");
    double worst = -1e300;
    for (const auto& h : sys.halfspaces) {
      double s = -h.offset.get_d();
      double scale = 1.0 + std::abs(h.offset.get_d());
      for (int j = 0; j < d; ++j) {
        s += h.normal[j].get_d() * (*fp)[j];
        scale = std::max(scale, std::abs(h.normal[j].get_d() * (*fp)[j]));
      }
      worst = std::max(worst, s / scale);
    }
    if (worst < -tol)
      return make(RobustnessClass::Kind::RobustTrapped, 1,
                  "contraction with an interior fixed point");
    if (worst > tol)
      return make(RobustnessClass::Kind::NotRobust, 0,
                  "contraction but the fixed point is not interior");
    return make(RobustnessClass::Kind::Undetermined, 0,
                "fixed point within tolerance of the boundary");
  }

  // Dominant real eigenvalue candidate for cases 2 and 3.
  int dominant = -1;
  for (int i = 0; i < d; ++i) {
    const Cplx& z = eig.roots[i];
    if (std::abs(z.imag()) > tol * (1.0 + std::abs(z))) continue;
    if (z.real() <= 0.0) continue;
    if (dominant < 0 || z.real() > eig.roots[dominant].real()) dominant = i;
  }
  bool have_dominant = false;
  double rho = 0.0;
  if (dominant >= 0) {
    rho = eig.roots[dominant].real();
    have_dominant = true;
    for (int i = 0; i < d && have_dominant; ++i) {
      if (i == dominant) continue;
      if (std::abs(eig.roots[i]) > rho - tol) have_dominant = false;  // not strictly dominant
    }
  }

  if (!have_dominant) {
    // Neither a contraction (exactly or decisively) nor any strictly
    // dominant positive real eigenvalue: none of the trapped cases apply.
    return make(RobustnessClass::Kind::NotRobust, 0,
                "no strictly dominant positive real eigenvalue");
  }

  const bool rho_is_one = one_is_eigenvalue && std::abs(rho - 1.0) < 0.5;
  if (rho_is_one) {
    // Exact simplicity of the eigenvalue one.
    if (sgn(poly_derivative_eval_exact(cp, mpq_class(1))) == 0)
      return make(RobustnessClass::Kind::Undetermined, 0,
                  "eigenvalue one is not simple");
  } else if (rho < 1.0 + tol) {
    return make(RobustnessClass::Kind::Undetermined, 0,
                "dominant eigenvalue within tolerance of one");
  }

  Mat shifted(d, std::vector<double>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) shifted[i][j] = a[i][j] - (i == j ? rho : 0.0);
  auto v = null_vector(shifted);
  Mat shifted_t(d, std::vector<double>(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) shifted_t[i][j] = a[j][i] - (i == j ? rho : 0.0);
  auto l = null_vector(shifted_t);
  if (!v || !l)
    return make(RobustnessClass::Kind::Undetermined, 0, "eigenvector extraction failed");

  // Pick the eigenvector sign putting v inside the interior of the recession
  // cone; decisively outside for both signs kills cases 2 and 3.
  auto cone_margin = [&](double sign) {
    double worst = -1e300;
    for (const auto& h : sys.halfspaces) {
      double s = 0.0, scale = 1e-30;
      for (int j = 0; j < d; ++j) {
        s += h.normal[j].get_d() * sign * (*v)[j];
        scale = std::max(scale, std::abs(h.normal[j].get_d()));
      }
      worst = std::max(worst, s / scale);
    }
    return worst;  // negative = interior
  };
  double mplus = cone_margin(1.0), mminus = cone_margin(-1.0);
  double chosen_sign;
  if (mplus < -tol)
    chosen_sign = 1.0;
  else if (mminus < -tol)
    chosen_sign = -1.0;
  else if (mplus > tol && mminus > tol)
    return make(RobustnessClass::Kind::NotRobust, 0,
                "dominant eigenvector outside the recession cone interior");
  else
    return make(RobustnessClass::Kind::Undetermined, 0,
                "eigenvector within tolerance of the recession cone boundary");

  double lv = 0.0, lx = 0.0, lb = 0.0, lnorm = 0.0;
  for (int j = 0; j < d; ++j) {
    lv += (*l)[j] * chosen_sign * (*v)[j];
    lx += (*l)[j] * x0[j];
    lb += (*l)[j] * b[j];
    lnorm = std::max(lnorm, std::abs((*l)[j]));
  }
  if (std::abs(lv) < tol * lnorm)
    return make(RobustnessClass::Kind::Undetermined, 0,
                "left/right eigenvector pairing degenerate");
  double alpha = lx / lv;
  double beta = lb / lv;
  double x0_scale = 1.0;
  for (int j = 0; j < d; ++j) x0_scale = std::max(x0_scale, std::abs(x0[j]));

  if (!rho_is_one) {  // case 2: expansion along an interior direction
    if (alpha > tol * x0_scale)
      return make(RobustnessClass::Kind::RobustTrapped, 2,
                  "dominant expansion along an interior direction");
    if (alpha < -tol * x0_scale)
      return make(RobustnessClass::Kind::NotRobust, 0,
                  "initial point on the wrong side of the dominant eigenvector");
    return make(RobustnessClass::Kind::Undetermined, 0,
                "eigencomponent of the initial point within tolerance of zero");
  }

  // case 3: unit eigenvalue with positive drift and eigencomponent.
  double b_scale = 1.0;
  for (int j = 0; j < d; ++j) b_scale = std::max(b_scale, std::abs(b[j]));
  if (alpha > tol * x0_scale && beta > tol * b_scale)
    return make(RobustnessClass::Kind::RobustTrapped, 3,
                "unit eigenvalue with positive drift along an interior direction");
  return make(RobustnessClass::Kind::Undetermined, 0,
              "unit-eigenvalue instance without decisive drift margins");
}

}  // namespace escape
