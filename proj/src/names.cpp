#include "escape/names.hpp"

#include <array>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace escape {

namespace {

std::string coords_str(const CubeCoords& c, int dim) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << c[i];
  os << ")";
  return os.str();
}

Dyadic window_bound(int stage) { return Dyadic(mpz_class(1), stage); }  // 2^stage

}  // namespace

// ---- PointName --------------------------------------------------------------

struct PointName::Impl {
  std::vector<mpq_class> point;
  mutable std::mutex mu;
  mutable std::map<int, CubeSet> stages;
};

PointName::PointName(std::vector<mpq_class> point) : impl_(std::make_shared<Impl>()) {
  if (point.empty() || static_cast<int>(point.size()) > kMaxDim)
    throw std::invalid_argument("point dimension out of supported range");
  impl_->point = std::move(point);
}

int PointName::dimension() const { return static_cast<int>(impl_->point.size()); }

const std::vector<mpq_class>& PointName::point() const { return impl_->point; }

const CubeSet& PointName::stage(int n) const {
  std::lock_guard<std::mutex> lock(impl_->mu);
  auto it = impl_->stages.find(n);
  if (it != impl_->stages.end()) return it->second;

  // Ball radius 2^(1-n); successive radii satisfy r_{n+1} + 2^(-n-1) <= r_n,
  // which makes the rasterized stages nested.
  mpq_class r = n >= 1 ? make_rational(1, mpz_class(1) << (n - 1))
                       : mpq_class(mpz_class(1) << (1 - n));
  std::vector<std::pair<mpq_class, mpq_class>> box;
  for (const auto& xi : impl_->point) box.emplace_back(xi - r, xi + r);
  CubeSet cubes = rasterize_rational_box(n, dimension(), box);
  auto [ins, _] = impl_->stages.emplace(n, std::move(cubes));
  return ins->second;
}

// ---- FunctionName ------------------------------------------------------------

struct FunctionName::Impl {
  std::vector<ExprPtr> components;
  int dim = 0;
  bool apply_pad = true;

  mutable std::array<std::mutex, kMaxLevel + 1> stage_mu;
  mutable std::array<std::unordered_map<CubeCoords, Value, CubeCoordsHash>, kMaxLevel + 1>
      stage_memo;

  const Value& value(int stage, const CubeCoords& q) const;
  Value compute(int stage, const CubeCoords& q) const;
};

FunctionName FunctionName::from_components(std::vector<ExprPtr> components) {
  FunctionName f;
  f.impl_ = std::make_shared<Impl>();
  f.impl_->dim = static_cast<int>(components.size());
  if (f.impl_->dim < 1 || f.impl_->dim > kMaxDim)
    throw std::invalid_argument("function dimension out of supported range");
  for (const auto& c : components) {
    if (!c) throw std::invalid_argument("null component expression");
    if (c->max_var_index() > f.impl_->dim)
      throw std::invalid_argument("component mentions a variable beyond the dimension");
  }
  f.impl_->components = std::move(components);
  return f;
}

FunctionName FunctionName::from_components_unpadded_for_tests(std::vector<ExprPtr> components) {
  FunctionName f = from_components(std::move(components));
  f.impl_->apply_pad = false;
  return f;
}

int FunctionName::dimension() const { return impl_->dim; }

const std::vector<ExprPtr>& FunctionName::components() const { return impl_->components; }

const FunctionName::Value& FunctionName::value(int stage, const CubeCoords& q) const {
  if (stage < 0 || stage > kMaxLevel) throw std::invalid_argument("stage out of range");
  if (!is_window_cube(stage, impl_->dim, q))
    throw std::invalid_argument("function name queried outside the stage window");
  return impl_->value(stage, q);
}

const FunctionName::Value& FunctionName::Impl::value(int stage, const CubeCoords& q) const {
  std::lock_guard<std::mutex> lock(stage_mu[stage]);
  auto& memo = stage_memo[stage];
  auto it = memo.find(q);
  if (it != memo.end()) return it->second;
  Value v = compute(stage, q);  // recursion only touches smaller stages
  return memo.emplace(q, std::move(v)).first->second;
}

FunctionName::Value FunctionName::Impl::compute(int stage, const CubeCoords& q) const {
  Value out;

  const Value* parent = nullptr;
  if (stage > 0) {
    CubeCoords pq = parent_coords(q, dim);
    if (is_window_cube(stage - 1, dim, pq)) {
      const Value& pv = value(stage - 1, pq);
      if (!pv.out_of_window) parent = &pv;
    }
  }

  Box qbox = cube_box(stage, dim, q);
  auto enclosure = eval_vector_on_box(components, qbox, stage + 4);
  if (!enclosure) {
    out.out_of_window = true;  // indeterminate division on this cube
    return out;
  }

  const Dyadic pad = Dyadic::power_of_two(-(stage + 2));
  const Dyadic bound = window_bound(stage);
  Box padded;
  padded.reserve(dim);
  for (const auto& iv : *enclosure) {
    DyadicInterval p = apply_pad ? iv.padded(pad) : iv;
    if (p.lo < -bound || p.hi > bound) {
      out.out_of_window = true;
      return out;
    }
    padded.push_back(std::move(p));
  }

  CubeSet cand(stage, dim);
  if (apply_pad) {
    try {
      cand = rasterize_box(stage, dim, padded);
    } catch (const std::overflow_error&) {
      out.out_of_window = true;  // enclosure too coarse to materialize
      return out;
    }
  } else {
    // Test mode: truncated rasterization drops cubes that only touch the
    // enclosure, so a grid-aligned image endpoint lands on the value's
    // boundary and the validator has a violation to find.
    std::array<std::int64_t, kMaxDim> first{}, last{};
    for (int i = 0; i < dim; ++i) {
      first[i] = padded[i].lo.floor_scaled(stage).get_si();
      last[i] = std::max(first[i], padded[i].hi.ceil_scaled(stage).get_si() - 1);
    }
    CubeCoords c{};
    std::array<std::int64_t, kMaxDim> cur = first;
    while (true) {
      for (int i = 0; i < dim; ++i) c[i] = static_cast<std::int32_t>(cur[i]);
      cand.insert(c);
      int axis = 0;
      while (axis < dim) {
        if (++cur[axis] <= last[axis]) break;
        cur[axis] = first[axis];
        ++axis;
      }
      if (axis == dim) break;
    }
  }

  if (parent != nullptr) {
    // Nesting is forced: keep only cubes refining the parent's value.
    CubeSet kept(stage, dim);
    cand.for_each([&](const CubeCoords& c) {
      CubeCoords pc = parent_coords(c, dim);
      if (std::binary_search(parent->cubes.begin(), parent->cubes.end(), pc)) kept.insert(c);
    });
    cand = std::move(kept);
  }
  if (cand.empty()) throw std::logic_error("function name produced an empty enclosure");

  out.cubes = cand.sorted();
  return out;
}

// ---- ClosedSetName -----------------------------------------------------------

struct ClosedSetName::Impl {
  int dim = 0;
  std::vector<ExprPtr> constraints;

  mutable std::array<std::mutex, kMaxLevel + 1> stage_mu;
  mutable std::array<std::unordered_map<CubeCoords, std::uint8_t, CubeCoordsHash>,
                     kMaxLevel + 1>
      stage_memo;  // bit0: interior, bit1: exterior

  std::uint8_t membership(int stage, const CubeCoords& q) const;
  std::uint8_t compute(int stage, const CubeCoords& q) const;
};

ClosedSetName ClosedSetName::from_constraints(int dim, std::vector<ExprPtr> constraints) {
  if (dim < 1 || dim > kMaxDim)
    throw std::invalid_argument("set dimension out of supported range");
  ClosedSetName s;
  s.impl_ = std::make_shared<Impl>();
  s.impl_->dim = dim;
  for (const auto& g : constraints) {
    if (!g) throw std::invalid_argument("null constraint expression");
    if (g->max_var_index() > dim)
      throw std::invalid_argument("constraint mentions a variable beyond the dimension");
  }
  s.impl_->constraints = std::move(constraints);
  return s;
}

int ClosedSetName::dimension() const { return impl_->dim; }

const std::vector<ExprPtr>& ClosedSetName::constraints() const { return impl_->constraints; }

std::uint8_t ClosedSetName::Impl::membership(int stage, const CubeCoords& q) const {
  std::lock_guard<std::mutex> lock(stage_mu[stage]);
  auto& memo = stage_memo[stage];
  auto it = memo.find(q);
  if (it != memo.end()) return it->second;
  std::uint8_t bits = compute(stage, q);
  memo.emplace(q, bits);
  return bits;
}

std::uint8_t ClosedSetName::Impl::compute(int stage, const CubeCoords& q) const {
  Box qbox = cube_box(stage, dim, q);
  bool interior = true;
  bool exterior = false;
  for (const auto& g : constraints) {
    auto iv = eval_on_box(*g, qbox, stage + 4);
    if (!iv) {
      interior = false;  // no certainty from an indeterminate enclosure
      continue;
    }
    if (!(iv->hi.sign() < 0)) interior = false;
    if (iv->lo.sign() > 0) exterior = true;
  }
  std::uint8_t bits = 0;
  if (interior) bits |= 1;
  if (exterior) bits |= 2;

  if (bits != 3 && stage > 0) {  // hereditary union with the refined predecessor
    CubeCoords pq = parent_coords(q, dim);
    if (is_window_cube(stage - 1, dim, pq)) bits |= membership(stage - 1, pq);
  }
  return bits;
}

bool ClosedSetName::in_interior(int stage, const CubeCoords& q) const {
  if (stage < 0 || stage > kMaxLevel) throw std::invalid_argument("stage out of range");
  if (!is_window_cube(stage, impl_->dim, q)) return false;
  return impl_->membership(stage, q) & 1;
}

bool ClosedSetName::in_exterior(int stage, const CubeCoords& q) const {
  if (stage < 0 || stage > kMaxLevel) throw std::invalid_argument("stage out of range");
  if (!is_window_cube(stage, impl_->dim, q)) return false;
  return (impl_->membership(stage, q) & 2) != 0;
}

namespace {

constexpr std::int64_t kMaxMaterializeCubes = std::int64_t(1) << 22;

template <typename Pred>
CubeSet materialize_window(int stage, int dim, Pred&& pred) {
  std::int64_t per_axis = 2 * window_coord_bound(stage) + 2;
  std::int64_t total = 1;
  for (int i = 0; i < dim; ++i) {
    if (total > kMaxMaterializeCubes / per_axis)
      throw std::overflow_error("stage window too large to materialize");
    total *= per_axis;
  }
  CubeSet out(stage, dim);
  std::int64_t bound = window_coord_bound(stage);
  CubeCoords c{};
  for (int i = 0; i < dim; ++i) c[i] = static_cast<std::int32_t>(-bound - 1);
  while (true) {
    if (pred(c)) out.insert(c);
    int axis = 0;
    while (axis < dim) {
      if (++c[axis] <= bound) break;
      c[axis] = static_cast<std::int32_t>(-bound - 1);
      ++axis;
    }
    if (axis == dim) break;
  }
  return out;
}

}  // namespace

CubeSet ClosedSetName::interior_cubes(int stage) const {
  return materialize_window(stage, impl_->dim,
                            [&](const CubeCoords& c) { return in_interior(stage, c); });
}

CubeSet ClosedSetName::exterior_cubes(int stage) const {
  return materialize_window(stage, impl_->dim,
                            [&](const CubeCoords& c) { return in_exterior(stage, c); });
}

// ---- validation --------------------------------------------------------------

namespace {

void report_issue(NameValidationReport& rep, std::string condition, int stage,
                  const CubeCoords& cube, std::string detail) {
  rep.ok = false;
  rep.issues.push_back({std::move(condition), stage, cube, std::move(detail)});
}

// Uniform random rational in [-span, span] with denominator 2^6 * small.
mpq_class random_rational(std::mt19937_64& rng, long span) {
  std::uniform_int_distribution<long> den_pick(1, 64);
  long den = den_pick(rng);
  std::uniform_int_distribution<long> num_pick(-span * den, span * den);
  return make_rational(num_pick(rng), den);
}

// Cube at `level` containing x (the floor cube).
CubeCoords cube_containing(const std::vector<mpq_class>& x, int level, int dim) {
  CubeCoords c{};
  for (int i = 0; i < dim; ++i) {
    mpz_class num = x[i].get_num();
    mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), level);
    mpz_class fl;
    mpz_fdiv_q(fl.get_mpz_t(), num.get_mpz_t(), x[i].get_den().get_mpz_t());
    c[i] = static_cast<std::int32_t>(fl.get_si());
  }
  return c;
}

CubeSet cubes_as_set(const std::vector<CubeCoords>& cubes, int level, int dim) {
  CubeSet s(level, dim);
  s.reserve(cubes.size());
  for (const auto& c : cubes) s.insert(c);
  return s;
}

std::vector<mpq_class> cube_corner(const CubeCoords& q, int level, int dim, int mask) {
  std::vector<mpq_class> corner;
  corner.reserve(dim);
  mpz_class den = mpz_class(1) << level;
  for (int i = 0; i < dim; ++i)
    corner.push_back(make_rational(mpz_class(q[i] + ((mask >> i) & 1)), den));
  return corner;
}

// Random rational point interior to cube q.
std::vector<mpq_class> random_point_in_cube(std::mt19937_64& rng, const CubeCoords& q,
                                            int level, int dim) {
  std::vector<mpq_class> x;
  x.reserve(dim);
  std::uniform_int_distribution<long> pick(1, 63);
  mpz_class den = (mpz_class(1) << level) * 64;
  for (int i = 0; i < dim; ++i)
    x.push_back(make_rational(mpz_class(q[i]) * 64 + pick(rng), den));
  return x;
}

}  // namespace

NameValidationReport validate_point_name(const PointName& name, int max_stage) {
  NameValidationReport rep;
  const int d = name.dimension();
  for (int n = 0; n <= max_stage; ++n) {
    const CubeSet& xs = name.stage(n);
    ++rep.cubes_checked;
    if (xs.empty()) {
      report_issue(rep, "point-stage-empty", n, CubeCoords{}, "stage produced no cubes");
      continue;
    }
    if (!region_interior_contains_point(xs, name.point()))
      report_issue(rep, "point-not-interior", n, *xs.sorted().begin(),
                   "point not in the interior of its stage enclosure");
    Dyadic diam = region_diameter(xs);
    if (diam > Dyadic(mpz_class(6), -n))
      report_issue(rep, "point-diameter", n, *xs.sorted().begin(),
                   "stage diameter exceeds 6*2^-n: " + diam.to_string());
    if (n > 0) {
      const CubeSet& prev = name.stage(n - 1);
      xs.for_each([&](const CubeCoords& c) {
        if (!prev.contains(parent_coords(c, d)))
          report_issue(rep, "point-nesting", n, c, "cube not inside the previous stage");
      });
    }
  }
  return rep;
}

NameValidationReport validate_function_name(const FunctionName& name, int max_stage,
                                            int sample_budget, std::uint64_t seed) {
  NameValidationReport rep;
  const int d = name.dimension();
  std::mt19937_64 rng(seed);
  const int per_stage = std::max(1, sample_budget / (max_stage + 1));

  for (int n = 0; n <= max_stage; ++n) {
    long span = 1L << std::min(n, 3);  // probe region, clipped to the window
    for (int s = 0; s < per_stage; ++s) {
      std::vector<mpq_class> x;
      for (int i = 0; i < d; ++i) x.push_back(random_rational(rng, span));
      CubeCoords q = cube_containing(x, n, d);
      if (!is_window_cube(n, d, q)) continue;
      const auto& v = name.value(n, q);
      ++rep.cubes_checked;
      if (v.out_of_window) {
        ++rep.out_of_window_skipped;
        continue;
      }
      CubeSet region = cubes_as_set(v.cubes, n, d);

      // Strict-interior soundness at every corner and at a random inner point.
      for (int mask = 0; mask < (1 << d); ++mask) {
        auto corner = cube_corner(q, n, d, mask);
        auto fx = eval_vector_exact(name.components(), corner);
        if (!fx) continue;  // division-free guarantee only holds off the corner
        ++rep.samples_checked;
        if (!region_interior_contains_point(region, *fx)) {
          report_issue(rep, "function-soundness", n, q,
                       "exact image of corner " + coords_str(q, d) +
                           " not interior to the enclosure");
          break;
        }
      }
      auto inner = random_point_in_cube(rng, q, n, d);
      if (auto fx = eval_vector_exact(name.components(), inner)) {
        ++rep.samples_checked;
        if (!region_interior_contains_point(region, *fx))
          report_issue(rep, "function-soundness", n, q,
                       "exact image of an interior sample not interior to the enclosure");
      }

      // Nesting against the children's values.
      if (n < max_stage) {
        CubeSet kids = children(DyadicCube{n, d, q});
        bool bad = false;
        kids.for_each([&](const CubeCoords& child) {
          if (bad || !is_window_cube(n + 1, d, child)) return;
          const auto& cv = name.value(n + 1, child);
          if (cv.out_of_window) return;
          for (const auto& cc : cv.cubes) {
            if (!region.contains(parent_coords(cc, d))) {
              report_issue(rep, "function-nesting", n + 1, child,
                           "child enclosure escapes the parent enclosure");
              bad = true;
              return;
            }
          }
        });
      }
    }
  }

  // Shrinkage probe over [-1,1]^d: least stage m with every enclosure
  // diameter < 2^-n. Observation only.
  for (int target = 0; target <= std::min(max_stage, 4); ++target) {
    int found = -1;
    for (int m = target; m <= max_stage && found < 0; ++m) {
      bool all_small = true;
      std::int64_t bound = std::int64_t(1) << m;  // cubes covering [-1,1]
      if (bound > 64) break;                      // keep the probe enumerable
      CubeCoords c{};
      for (int i = 0; i < d; ++i) c[i] = static_cast<std::int32_t>(-bound);
      while (all_small) {
        const auto& v = name.value(m, c);
        if (v.out_of_window) {
          all_small = false;
          break;
        }
        Dyadic diam = region_diameter(cubes_as_set(v.cubes, m, d));
        if (!(diam < Dyadic::power_of_two(-target))) all_small = false;
        int axis = 0;
        while (axis < d) {
          if (++c[axis] <= bound - 1) break;
          c[axis] = static_cast<std::int32_t>(-bound);
          ++axis;
        }
        if (axis == d) break;
      }
      if (all_small) found = m;
    }
    rep.modulus_probe.emplace_back(target, found);
  }
  return rep;
}

NameValidationReport validate_closed_set_name(const ClosedSetName& name, int max_stage,
                                              int sample_budget, std::uint64_t seed) {
  NameValidationReport rep;
  const int d = name.dimension();
  std::mt19937_64 rng(seed);
  const int per_stage = std::max(1, sample_budget / (max_stage + 1));

  for (int n = 0; n <= max_stage; ++n) {
    long span = 1L << std::min(n, 3);
    for (int s = 0; s < per_stage; ++s) {
      std::vector<mpq_class> x;
      for (int i = 0; i < d; ++i) x.push_back(random_rational(rng, span));
      CubeCoords q = cube_containing(x, n, d);
      if (!is_window_cube(n, d, q)) continue;
      ++rep.cubes_checked;

      bool interior = name.in_interior(n, q);
      bool exterior = name.in_exterior(n, q);
      if (interior && exterior)
        report_issue(rep, "set-contradiction", n, q, "cube both interior and exterior");

      // Exact signs at the sample point certify the claims.
      bool all_neg = true, some_pos = false, determined = true;
      for (const auto& g : name.constraints()) {
        auto gv = eval_exact(*g, x);
        if (!gv) {
          determined = false;
          break;
        }
        if (!(sgn(*gv) < 0)) all_neg = false;
        if (sgn(*gv) > 0) some_pos = true;
      }
      if (determined) {
        ++rep.samples_checked;
        if (interior && !all_neg)
          report_issue(rep, "set-interior-soundness", n, q,
                       "interior cube contains a point with a nonnegative constraint");
        if (exterior && !some_pos)
          report_issue(rep, "set-exterior-soundness", n, q,
                       "exterior cube contains a point satisfying every constraint");
      }

      // Hereditary conditions.
      if (n < max_stage && (interior || exterior)) {
        CubeSet kids = children(DyadicCube{n, d, q});
        kids.for_each([&](const CubeCoords& child) {
          if (interior && !name.in_interior(n + 1, child))
            report_issue(rep, "set-hereditary-interior", n + 1, child,
                         "child of an interior cube not interior at the next stage");
          if (exterior && !name.in_exterior(n + 1, child))
            report_issue(rep, "set-hereditary-exterior", n + 1, child,
                         "child of an exterior cube not exterior at the next stage");
        });
      }
    }
  }

  // Eventual-coverage probe: points with strictly negative constraints should
  // land in the interior cubes at some stage. Observation only; the least
  // such stage for the last probed point is recorded per target.
  for (int probe = 0; probe < 8; ++probe) {
    std::vector<mpq_class> x;
    for (int i = 0; i < d; ++i) x.push_back(random_rational(rng, 1));
    bool strictly_inside = true;
    for (const auto& g : name.constraints()) {
      auto gv = eval_exact(*g, x);
      if (!gv || !(sgn(*gv) < 0)) {
        strictly_inside = false;
        break;
      }
    }
    if (!strictly_inside) continue;
    int found = -1;
    for (int m = 0; m <= max_stage && found < 0; ++m) {
      CubeCoords q = cube_containing(x, m, d);
      if (is_window_cube(m, d, q) && name.in_interior(m, q)) found = m;
    }
    rep.modulus_probe.emplace_back(probe, found);
  }
  return rep;
}

}  // namespace escape
