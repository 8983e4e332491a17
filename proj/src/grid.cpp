#include "escape/grid.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace escape {

namespace {

constexpr std::size_t kInitialCapacity = 16;
constexpr std::size_t kMaxRasterCubes = std::size_t(1) << 20;

void check_level_dim(int level, int dim) {
  if (level < 0 || level > kMaxLevel)
    throw std::invalid_argument("cube level out of supported range");
  if (dim < 1 || dim > kMaxDim)
    throw std::invalid_argument("cube dimension out of supported range");
}

std::int32_t narrow_coord(const mpz_class& v) {
  if (!v.fits_slong_p()) throw std::overflow_error("cube coordinate overflow");
  long x = v.get_si();
  if (x <= INT32_MIN || x > INT32_MAX) throw std::overflow_error("cube coordinate overflow");
  return static_cast<std::int32_t>(x);
}

void check_compatible(const CubeSet& a, const CubeSet& b) {
  if (a.level() != b.level() || a.dim() != b.dim())
    throw std::invalid_argument("cube set level/dimension mismatch");
}

}  // namespace

CubeSet::CubeSet(int level, int dim) : level_(level), dim_(dim) {
  check_level_dim(level, dim);
  slots_.assign(kInitialCapacity, CubeCoords{kEmpty});
  mask_ = kInitialCapacity - 1;
}

void CubeSet::clear() {
  slots_.assign(kInitialCapacity, CubeCoords{kEmpty});
  mask_ = kInitialCapacity - 1;
  size_ = 0;
}

void CubeSet::reserve(std::size_t n) {
  std::size_t want = kInitialCapacity;
  while (want < 2 * n) want <<= 1;
  if (want <= slots_.size()) return;
  std::vector<CubeCoords> old = std::move(slots_);
  slots_.assign(want, CubeCoords{kEmpty});
  mask_ = want - 1;
  size_ = 0;
  for (const auto& c : old) {
    if (c[0] != kEmpty) insert(c);
  }
}

std::size_t CubeSet::find_slot(const CubeCoords& c) const {
  std::size_t i = CubeCoordsHash{}(c)&mask_;
  while (true) {
    const auto& slot = slots_[i];
    if (slot[0] == kEmpty || slot == c) return i;
    i = (i + 1) & mask_;
  }
}

void CubeSet::grow() {
  std::vector<CubeCoords> old = std::move(slots_);
  slots_.assign(old.size() * 2, CubeCoords{kEmpty});
  mask_ = slots_.size() - 1;
  size_ = 0;
  for (const auto& c : old) {
    if (c[0] != kEmpty) insert(c);
  }
}

bool CubeSet::insert(const CubeCoords& c) {
  assert(c[0] != kEmpty);
  std::size_t i = find_slot(c);
  if (slots_[i][0] != kEmpty) return false;
  slots_[i] = c;
  ++size_;
  if (size_ * 10 >= slots_.size() * 7) grow();
  return true;
}

bool CubeSet::contains(const CubeCoords& c) const {
  return slots_[find_slot(c)][0] != kEmpty;
}

std::vector<CubeCoords> CubeSet::sorted() const {
  std::vector<CubeCoords> out;
  out.reserve(size_);
  for_each([&](const CubeCoords& c) { out.push_back(c); });
  std::sort(out.begin(), out.end());
  return out;
}

bool CubeSet::operator==(const CubeSet& o) const {
  if (level_ != o.level_ || dim_ != o.dim_ || size_ != o.size_) return false;
  bool eq = true;
  for_each([&](const CubeCoords& c) {
    if (!o.contains(c)) eq = false;
  });
  return eq;
}

CubeSet children(const DyadicCube& cube) {
  check_level_dim(cube.level + 1, cube.dim);
  CubeSet out(cube.level + 1, cube.dim);
  const int n = 1 << cube.dim;
  for (int mask = 0; mask < n; ++mask) {
    CubeCoords c{};
    for (int i = 0; i < cube.dim; ++i) {
      std::int64_t k = 2 * std::int64_t(cube.coords[i]) + ((mask >> i) & 1);
      c[i] = static_cast<std::int32_t>(k);
    }
    out.insert(c);
  }
  return out;
}

CubeSet rasterize_rational_box(int level, int dim,
                               std::span<const std::pair<mpq_class, mpq_class>> box) {
  check_level_dim(level, dim);
  if (static_cast<int>(box.size()) != dim)
    throw std::invalid_argument("rasterize: box rank != dimension");

  // Cube k meets [lo, hi] iff ceil(lo*2^n) - 1 <= k <= floor(hi*2^n).
  std::array<std::int64_t, kMaxDim> first{}, last{};
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) {
    const auto& [lo, hi] = box[i];
    if (lo > hi) throw std::invalid_argument("rasterize: empty box interval");
    mpz_class lo_scaled_num = lo.get_num();
    mpz_mul_2exp(lo_scaled_num.get_mpz_t(), lo_scaled_num.get_mpz_t(), level);
    mpz_class lo_ceil;
    mpz_cdiv_q(lo_ceil.get_mpz_t(), lo_scaled_num.get_mpz_t(), lo.get_den().get_mpz_t());
    mpz_class hi_scaled_num = hi.get_num();
    mpz_mul_2exp(hi_scaled_num.get_mpz_t(), hi_scaled_num.get_mpz_t(), level);
    mpz_class hi_floor;
    mpz_fdiv_q(hi_floor.get_mpz_t(), hi_scaled_num.get_mpz_t(), hi.get_den().get_mpz_t());
    first[i] = narrow_coord(lo_ceil - 1);
    last[i] = narrow_coord(hi_floor);
    std::size_t count = static_cast<std::size_t>(last[i] - first[i] + 1);
    if (count == 0 || total > kMaxRasterCubes / count)
      throw std::overflow_error("rasterize: cube count exceeds bound");
    total *= count;
  }

  CubeSet out(level, dim);
  out.reserve(total);
  CubeCoords c{};
  std::array<std::int64_t, kMaxDim> cur = first;
  while (true) {
    for (int i = 0; i < dim; ++i) c[i] = static_cast<std::int32_t>(cur[i]);
    out.insert(c);
    int axis = 0;
    while (axis < dim) {
      if (++cur[axis] <= last[axis]) break;
      cur[axis] = first[axis];
      ++axis;
    }
    if (axis == dim) break;
  }
  return out;
}

CubeSet rasterize_box(int level, int dim, std::span<const DyadicInterval> box) {
  check_level_dim(level, dim);
  if (static_cast<int>(box.size()) != dim)
    throw std::invalid_argument("rasterize: box rank != dimension");

  std::array<std::int64_t, kMaxDim> first{}, last{};
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) {
    const auto& iv = box[i];
    auto lo_ceil = iv.lo.ceil_scaled_i64(level);
    auto hi_floor = iv.hi.floor_scaled_i64(level);
    if (!lo_ceil || !hi_floor) {
      first[i] = narrow_coord(iv.lo.ceil_scaled(level) - 1);
      last[i] = narrow_coord(iv.hi.floor_scaled(level));
    } else {
      if (*lo_ceil - 1 <= INT32_MIN || *hi_floor > INT32_MAX)
        throw std::overflow_error("cube coordinate overflow");
      first[i] = *lo_ceil - 1;
      last[i] = *hi_floor;
    }
    std::size_t count = static_cast<std::size_t>(last[i] - first[i] + 1);
    if (count == 0 || total > kMaxRasterCubes / count)
      throw std::overflow_error("rasterize: cube count exceeds bound");
    total *= count;
  }

  CubeSet out(level, dim);
  out.reserve(total);
  CubeCoords c{};
  std::array<std::int64_t, kMaxDim> cur = first;
  while (true) {
    for (int i = 0; i < dim; ++i) c[i] = static_cast<std::int32_t>(cur[i]);
    out.insert(c);
    int axis = 0;
    while (axis < dim) {
      if (++cur[axis] <= last[axis]) break;
      cur[axis] = first[axis];
      ++axis;
    }
    if (axis == dim) break;
  }
  return out;
}

CubeSet set_union(const CubeSet& a, const CubeSet& b) {
  check_compatible(a, b);
  CubeSet out(a.level(), a.dim());
  out.reserve(a.size() + b.size());
  a.for_each([&](const CubeCoords& c) { out.insert(c); });
  b.for_each([&](const CubeCoords& c) { out.insert(c); });
  return out;
}

CubeSet set_intersection(const CubeSet& a, const CubeSet& b) {
  check_compatible(a, b);
  const CubeSet& small = a.size() <= b.size() ? a : b;
  const CubeSet& big = a.size() <= b.size() ? b : a;
  CubeSet out(a.level(), a.dim());
  small.for_each([&](const CubeCoords& c) {
    if (big.contains(c)) out.insert(c);
  });
  return out;
}

CubeSet set_difference(const CubeSet& a, const CubeSet& b) {
  check_compatible(a, b);
  CubeSet out(a.level(), a.dim());
  a.for_each([&](const CubeCoords& c) {
    if (!b.contains(c)) out.insert(c);
  });
  return out;
}

bool is_subset(const CubeSet& a, const CubeSet& b) {
  check_compatible(a, b);
  if (a.size() > b.size()) return false;
  bool sub = true;
  a.for_each([&](const CubeCoords& c) {
    if (!b.contains(c)) sub = false;
  });
  return sub;
}

void for_each_neighbor(const CubeCoords& c, int dim,
                       const std::function<bool(const CubeCoords&)>& visit) {
  int total = 1;
  for (int i = 0; i < dim; ++i) total *= 3;
  for (int idx = 0; idx < total; ++idx) {
    CubeCoords n{};
    int rest = idx;
    for (int i = 0; i < dim; ++i) {
      n[i] = c[i] + (rest % 3) - 1;
      rest /= 3;
    }
    if (!visit(n)) return;
  }
}

bool compactly_contained(const CubeSet& a, const CubeSet& b) {
  check_compatible(a, b);
  bool ok = true;
  a.for_each([&](const CubeCoords& c) {
    if (!ok) return;
    for_each_neighbor(c, a.dim(), [&](const CubeCoords& n) {
      if (!b.contains(n)) {
        ok = false;
        return false;
      }
      return true;
    });
  });
  return ok;
}

CubeSet refine(const CubeSet& a, int target_level) {
  if (target_level < a.level())
    throw std::invalid_argument("refine: target level below set level");
  check_level_dim(target_level, a.dim());
  int steps = target_level - a.level();
  std::size_t factor = std::size_t(1) << (steps * a.dim());
  if (a.size() > 0 && factor > kMaxRasterCubes / a.size())
    throw std::overflow_error("refine: cube count exceeds bound");

  CubeSet cur = a;
  for (int s = 0; s < steps; ++s) {
    CubeSet next(cur.level() + 1, cur.dim());
    next.reserve(cur.size() << cur.dim());
    cur.for_each([&](const CubeCoords& c) {
      int n = 1 << cur.dim();
      for (int mask = 0; mask < n; ++mask) {
        CubeCoords child{};
        for (int i = 0; i < cur.dim(); ++i)
          child[i] = static_cast<std::int32_t>(2 * std::int64_t(c[i]) + ((mask >> i) & 1));
        next.insert(child);
      }
    });
    cur = std::move(next);
  }
  return cur;
}

bool is_window_cube(int stage, int dim, const CubeCoords& c) {
  std::int64_t bound = window_coord_bound(stage);
  for (int i = 0; i < dim; ++i) {
    if (c[i] > bound || c[i] < -bound - 1) return false;
  }
  return true;
}

bool touches_window_complement(int stage, int dim, const CubeCoords& c) {
  std::int64_t bound = window_coord_bound(stage);
  for (int i = 0; i < dim; ++i) {
    if (c[i] >= bound || c[i] <= -bound - 1) return true;
  }
  return false;
}

Box cube_box(int level, int dim, const CubeCoords& c) {
  Box box;
  box.reserve(dim);
  for (int i = 0; i < dim; ++i) {
    box.emplace_back(Dyadic::from_parts(c[i], -level), Dyadic::from_parts(c[i] + 1, -level));
  }
  return box;
}

Dyadic region_diameter(const CubeSet& s) {
  if (s.empty()) return Dyadic();
  std::int64_t best = 0;
  for (int i = 0; i < s.dim(); ++i) {
    std::int64_t lo = INT64_MAX, hi = INT64_MIN;
    s.for_each([&](const CubeCoords& c) {
      lo = std::min<std::int64_t>(lo, c[i]);
      hi = std::max<std::int64_t>(hi, c[i]);
    });
    best = std::max(best, hi + 1 - lo);
  }
  return Dyadic(mpz_class(best), -s.level());
}

namespace {

// Coordinates (per axis) of the cubes whose closed region contains x_i.
// One cube when x_i is interior to it, two when x_i sits on a grid plane.
std::vector<std::int64_t> covering_coords(const mpq_class& x, int level) {
  mpz_class scaled_num = x.get_num();
  mpz_mul_2exp(scaled_num.get_mpz_t(), scaled_num.get_mpz_t(), level);
  mpz_class fl;
  mpz_fdiv_q(fl.get_mpz_t(), scaled_num.get_mpz_t(), x.get_den().get_mpz_t());
  std::vector<std::int64_t> out;
  std::int64_t k = narrow_coord(fl);
  out.push_back(k);
  if (scaled_num == fl * x.get_den()) out.push_back(k - 1);  // x on the shared face
  return out;
}

}  // namespace

bool region_contains_point(const CubeSet& s, const std::vector<mpq_class>& x) {
  if (static_cast<int>(x.size()) != s.dim())
    throw std::invalid_argument("point dimension mismatch");
  std::vector<std::vector<std::int64_t>> axes;
  for (const auto& xi : x) axes.push_back(covering_coords(xi, s.level()));
  // contained iff some covering cube is in the set
  std::vector<std::size_t> idx(x.size(), 0);
  while (true) {
    CubeCoords c{};
    for (std::size_t i = 0; i < x.size(); ++i)
      c[i] = static_cast<std::int32_t>(axes[i][idx[i]]);
    if (s.contains(c)) return true;
    std::size_t axis = 0;
    while (axis < x.size()) {
      if (++idx[axis] < axes[axis].size()) break;
      idx[axis] = 0;
      ++axis;
    }
    if (axis == x.size()) return false;
  }
}

bool region_interior_contains_point(const CubeSet& s, const std::vector<mpq_class>& x) {
  if (static_cast<int>(x.size()) != s.dim())
    throw std::invalid_argument("point dimension mismatch");
  std::vector<std::vector<std::int64_t>> axes;
  for (const auto& xi : x) axes.push_back(covering_coords(xi, s.level()));
  // interior iff every covering cube is in the set
  std::vector<std::size_t> idx(x.size(), 0);
  while (true) {
    CubeCoords c{};
    for (std::size_t i = 0; i < x.size(); ++i)
      c[i] = static_cast<std::int32_t>(axes[i][idx[i]]);
    if (!s.contains(c)) return false;
    std::size_t axis = 0;
    while (axis < x.size()) {
      if (++idx[axis] < axes[axis].size()) break;
      idx[axis] = 0;
      ++axis;
    }
    if (axis == x.size()) return true;
  }
}

}  // namespace escape
