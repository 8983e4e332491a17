#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "escape/expr.hpp"
#include "escape/grid.hpp"

namespace escape {

// Lazy stage-indexed producers of the finite data the escape algorithm
// consumes. Stage n works on the level-n grid restricted to the window
// [-2^n, 2^n]^d. All three names memoize per (stage, cube) and are safe to
// query from concurrent contexts; results are deterministic regardless of
// query order.

// Point name: stage n encloses the point by the level-n cubes meeting
// B(x, 2^(1-n)). Stages are nested and the enclosure diameter shrinks to 0.
class PointName {
 public:
  explicit PointName(std::vector<mpq_class> point);

  int dimension() const;
  const std::vector<mpq_class>& point() const;
  const CubeSet& stage(int n) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Function name: per window cube Q at stage n, a finite cube enclosure of
// f(Q) with f(Q) strictly inside it, nested under refinement. Values whose
// padded enclosure leaves [-2^n, 2^n]^d (or whose evaluation hits an
// indeterminate division) carry the out_of_window flag instead of cubes;
// the stage algorithm treats such values as meeting the window complement.
class FunctionName {
 public:
  struct Value {
    bool out_of_window = false;
    std::vector<CubeCoords> cubes;  // sorted, at the query stage's level
  };

  static FunctionName from_components(std::vector<ExprPtr> components);

  // Test seam: skips the interior pad before rasterization, producing a name
  // that violates the strict-interior contract when an image endpoint lands
  // on the grid. Only for exercising the validator's witness path.
  static FunctionName from_components_unpadded_for_tests(std::vector<ExprPtr> components);

  int dimension() const;
  const std::vector<ExprPtr>& components() const;

  // q must be a window cube at `stage`.
  const Value& value(int stage, const CubeCoords& q) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// Closed-set name for A = {x : g_i(x) <= 0 for all i}: per stage, cubes
// certainly inside the interior of A (I) and cubes certainly outside A (E),
// both hereditary across stages. Regularity precondition (documented, not
// checked): {x : g_i(x) < 0 for all i} must be dense in the interior of A.
class ClosedSetName {
 public:
  static ClosedSetName from_constraints(int dim, std::vector<ExprPtr> constraints);

  int dimension() const;
  const std::vector<ExprPtr>& constraints() const;

  // Membership of a single level-`stage` cube; false for non-window cubes.
  bool in_interior(int stage, const CubeCoords& q) const;
  bool in_exterior(int stage, const CubeCoords& q) const;

  // Materialized stage values; only valid while the window is small enough
  // to enumerate (tests and diagnostics).
  CubeSet interior_cubes(int stage) const;
  CubeSet exterior_cubes(int stage) const;

 private:
  struct Impl;
  std::shared_ptr<Impl> impl_;
};

// ---- validation ------------------------------------------------------------

struct NameValidationIssue {
  std::string condition;  // which contract failed
  int stage = 0;
  CubeCoords cube{};      // witness cube
  std::string detail;
};

struct NameValidationReport {
  bool ok = true;
  std::vector<NameValidationIssue> issues;
  // Enclosure-shrinkage probe: for each target accuracy n, the least stage m
  // at which every probe cube's enclosure has diameter < 2^-n (-1 if not
  // reached by the stage bound). Reported, never a violation.
  std::vector<std::pair<int, int>> modulus_probe;
  int cubes_checked = 0;
  int samples_checked = 0;
  int out_of_window_skipped = 0;
};

NameValidationReport validate_point_name(const PointName& name, int max_stage);

NameValidationReport validate_function_name(const FunctionName& name, int max_stage,
                                            int sample_budget, std::uint64_t seed);

NameValidationReport validate_closed_set_name(const ClosedSetName& name, int max_stage,
                                              int sample_budget, std::uint64_t seed);

}  // namespace escape
