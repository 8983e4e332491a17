#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "escape/dyadic.hpp"

namespace escape {

// Uniform dyadic grids Q^d_n: cube (k_1,...,k_d) at level n denotes
// prod_i [k_i/2^n, (k_i+1)/2^n]. Levels are capped so window coordinates
// (|k| <= 4^n + 1) always fit an int32 with slack; every narrowing from
// unbounded arithmetic is range-checked.
inline constexpr int kMaxDim = 6;
inline constexpr int kMaxLevel = 14;

using CubeCoords = std::array<std::int32_t, kMaxDim>;  // entries >= dim are 0

struct DyadicCube {
  int level = 0;
  int dim = 1;
  CubeCoords coords{};
};

inline CubeCoords make_coords(std::initializer_list<std::int32_t> ks) {
  CubeCoords c{};
  int i = 0;
  for (auto k : ks) c[i++] = k;
  return c;
}

struct CubeCoordsHash {
  std::size_t operator()(const CubeCoords& c) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    const auto* p = reinterpret_cast<const std::uint64_t*>(c.data());
    for (int i = 0; i < 3; ++i) {  // 6 x int32 = 3 x uint64
      std::uint64_t x = p[i] + h;
      x ^= x >> 33;
      x *= 0xff51afd7ed558ccdull;
      x ^= x >> 33;
      x *= 0xc4ceb9fe1a85ec53ull;
      x ^= x >> 33;
      h = x;
    }
    return static_cast<std::size_t>(h);
  }
};

// Finite union of same-level cubes, stored in an open-addressing table.
// All members share one level and dimension; duplicates are impossible.
class CubeSet {
 public:
  CubeSet() : CubeSet(0, 1) {}
  CubeSet(int level, int dim);

  int level() const { return level_; }
  int dim() const { return dim_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool insert(const CubeCoords& c);  // true if newly inserted
  bool contains(const CubeCoords& c) const;
  void clear();
  void reserve(std::size_t n);

  template <typename F>
  void for_each(F&& f) const {
    for (const auto& slot : slots_) {
      if (slot[0] != kEmpty) f(slot);
    }
  }

  std::vector<CubeCoords> sorted() const;  // lexicographic

  bool operator==(const CubeSet& o) const;
  bool operator!=(const CubeSet& o) const { return !(*this == o); }

 private:
  static constexpr std::int32_t kEmpty = INT32_MIN;

  void grow();
  std::size_t find_slot(const CubeCoords& c) const;

  int level_;
  int dim_;
  std::size_t size_ = 0;
  std::size_t mask_ = 0;
  std::vector<CubeCoords> slots_;
};

// ---- grid operations -------------------------------------------------------

// The 2^d level-(n+1) cubes tiling `cube` exactly.
CubeSet children(const DyadicCube& cube);

// Exactly the level-n cubes meeting the closed box (touching counts).
// Box endpoints must be dyadic; throws if the result exceeds coordinate or
// cardinality bounds.
CubeSet rasterize_box(int level, int dim, std::span<const DyadicInterval> box);

// Same contract for a rational box given as (lo, hi) pairs.
CubeSet rasterize_rational_box(int level, int dim,
                               std::span<const std::pair<mpq_class, mpq_class>> box);

// Exact set algebra; levels and dimensions must match.
CubeSet set_union(const CubeSet& a, const CubeSet& b);
CubeSet set_intersection(const CubeSet& a, const CubeSet& b);
CubeSet set_difference(const CubeSet& a, const CubeSet& b);
bool is_subset(const CubeSet& a, const CubeSet& b);

// |a| compactly contained in |b| (closure of |a| inside int |b|), decided by
// the 3^d-neighbourhood criterion: every cube of `a` has all coordinate
// neighbours (offsets in {-1,0,1}^d) in `b`.
bool compactly_contained(const CubeSet& a, const CubeSet& b);

// Enumerate the 3^d neighbours of c (including c itself).
void for_each_neighbor(const CubeCoords& c, int dim,
                       const std::function<bool(const CubeCoords&)>& visit);

// Same region, expressed at target_level >= a.level().
CubeSet refine(const CubeSet& a, int target_level);

inline CubeCoords parent_coords(const CubeCoords& c, int dim) {
  CubeCoords p{};
  for (int i = 0; i < dim; ++i) p[i] = c[i] >> 1;  // arithmetic shift = floor
  return p;
}

// ---- stage windows ---------------------------------------------------------
// The stage-n window is [-2^n, 2^n]^d; its cube cover has coords in
// [-4^n - 1, 4^n]. C_n is the set of level-n cubes disjoint from the window.

inline std::int64_t window_coord_bound(int stage) {
  return std::int64_t(1) << (2 * stage);  // 4^stage
}

// Cube belongs to Q^d_n([-2^n,2^n]^d).
bool is_window_cube(int stage, int dim, const CubeCoords& c);

// Cube region touches |C_n| (equivalently: not strictly inside the window
// cover). Used for the point test |X| cap |C_n| != empty.
bool touches_window_complement(int stage, int dim, const CubeCoords& c);

// ---- geometry helpers ------------------------------------------------------

Box cube_box(int level, int dim, const CubeCoords& c);

// sup-norm diameter of |s| as a dyadic (0 for empty sets).
Dyadic region_diameter(const CubeSet& s);

// Exact point-membership tests at rational points.
bool region_contains_point(const CubeSet& s, const std::vector<mpq_class>& x);
bool region_interior_contains_point(const CubeSet& s, const std::vector<mpq_class>& x);

}  // namespace escape
