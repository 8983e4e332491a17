#include <thread>

#include "doctest.h"
#include "escape/names.hpp"
#include "escape/systems.hpp"

using namespace escape;

namespace {

std::vector<mpq_class> pt1(const mpq_class& x) { return {x}; }

CubeSet value_region(const FunctionName::Value& v, int level, int dim) {
  CubeSet s(level, dim);
  for (const auto& c : v.cubes) s.insert(c);
  return s;
}

}  // namespace

TEST_CASE("point name stages enclose shrinking balls") {
  PointName zero(pt1(mpq_class(0)));
  // Stage 0 ball has radius 2; the level-0 cubes meeting [-2,2] are -3..2.
  const CubeSet& s0 = zero.stage(0);
  CHECK(s0.size() == 6);
  for (int k = -3; k <= 2; ++k) CHECK(s0.contains(make_coords({k})));

  PointName half(pt1(make_rational(1, 2)));
  // Stage 3 ball is [1/4, 3/4]; level-3 cubes 1..6 meet it (touching counts).
  const CubeSet& s3 = half.stage(3);
  CHECK(s3.size() == 6);
  for (int k = 1; k <= 6; ++k) CHECK(s3.contains(make_coords({k})));
}

TEST_CASE("point name satisfies its contract across stages") {
  for (auto& x : {pt1(mpq_class(0)), pt1(make_rational(1, 3)), pt1(make_rational(-7, 5))}) {
    PointName p(x);
    auto rep = validate_point_name(p, 10);
    CHECK(rep.ok);
    for (int n = 1; n <= 10; ++n) {
      const CubeSet& cur = p.stage(n);
      const CubeSet& prev = p.stage(n - 1);
      cur.for_each([&](const CubeCoords& c) {
        CHECK(prev.contains(parent_coords(c, 1)));
      });
      CHECK(region_diameter(cur) <= Dyadic(mpz_class(6), -n));
    }
  }
  PointName p2({make_rational(1, 7), make_rational(-2, 9)});
  CHECK(validate_point_name(p2, 8).ok);
}

TEST_CASE("function name value matches the hand rasterization for the identity") {
  FunctionName id = FunctionName::from_components({ex::var(1)});
  // Stage 2, cube [0,1/4]: enclosure [0,1/4] padded by 1/16 is [-1/16, 5/16],
  // whose level-2 cubes are -1, 0, 1.
  const auto& v = id.value(2, make_coords({0}));
  REQUIRE(!v.out_of_window);
  CHECK(v.cubes.size() == 3);
  CubeSet region = value_region(v, 2, 1);
  for (int k = -1; k <= 1; ++k) CHECK(region.contains(make_coords({k})));
  // Soundness: f(Q) = [0, 1/4] strictly inside [-1/4, 1/2].
  CHECK(region_interior_contains_point(region, pt1(mpq_class(0))));
  CHECK(region_interior_contains_point(region, pt1(make_rational(1, 4))));
}

TEST_CASE("constant map far from the window is out-of-window everywhere") {
  FunctionName five = FunctionName::from_components({ex::constant(5)});
  for (int k = -5; k <= 4; ++k) {
    CHECK(five.value(1, make_coords({k})).out_of_window);  // 5 is outside [-2,2]
  }
  // At stage 3 the window reaches 8 and values appear.
  CHECK(!five.value(3, make_coords({0})).out_of_window);
}

TEST_CASE("compactified doubling map stays near the unit interval") {
  AffineSystem dbl;
  dbl.dim = 1;
  dbl.a = {{mpq_class(2)}};
  dbl.b = {mpq_class(0)};
  dbl.halfspaces = {{{mpq_class(-1)}, mpq_class(0)}};
  dbl.x0 = {mpq_class(1)};
  FunctionName fbar = build_compactified_map(dbl);
  for (int n = 3; n <= 5; ++n) {
    for (int k : {-(1 << n), -3, 0, 5, (1 << n) - 1}) {  // cubes inside [-1,1]
      const auto& v = fbar.value(n, make_coords({k}));
      REQUIRE(!v.out_of_window);
      CubeSet region = value_region(v, n, 1);
      auto sorted = region.sorted();
      Dyadic lo(mpz_class(sorted.front()[0]), -n);
      Dyadic hi(mpz_class(sorted.back()[0] + 1), -n);
      Dyadic bound = Dyadic(1) + Dyadic(mpz_class(1), 1 - n);
      CHECK(lo >= -bound);
      CHECK(hi <= bound);
    }
  }
}

TEST_CASE("function name validation passes for expression-backed maps") {
  FunctionName id = FunctionName::from_components({ex::var(1)});
  auto rep = validate_function_name(id, 6, 200, 1234);
  CHECK(rep.ok);
  CHECK(rep.issues.empty());

  std::vector<ExprPtr> g1{
      ex::add(ex::sub(ex::mul(ex::var(1), ex::var(1)), ex::mul(ex::var(2), ex::var(2))),
              ex::constant(1)),
      ex::mul(ex::constant(2), ex::mul(ex::var(1), ex::var(2)))};
  auto rep2 = validate_function_name(FunctionName::from_components(g1), 5, 150, 99);
  CHECK(rep2.ok);
}

TEST_CASE("validator catches a deliberately unpadded name") {
  FunctionName bad = FunctionName::from_components_unpadded_for_tests({ex::var(1)});
  // The identity image of a cube has grid-aligned endpoints, so without the
  // pad the corners sit on the enclosure boundary.
  auto rep = validate_function_name(bad, 5, 300, 4321);
  CHECK(!rep.ok);
  REQUIRE(!rep.issues.empty());
  CHECK(rep.issues.front().condition == "function-soundness");
}

TEST_CASE("half-line set name accepts and rejects the right cubes") {
  ClosedSetName a = ClosedSetName::from_constraints(1, {ex::neg(ex::var(1))});
  // Stage 2: [-1/2,-1/4] is certainly outside [0, inf); [-1/4, 0] is not.
  CHECK(a.in_exterior(2, make_coords({-2})));
  CHECK(!a.in_exterior(2, make_coords({-1})));
  CHECK(a.in_interior(2, make_coords({1})));   // [1/4, 1/2] strictly positive
  CHECK(!a.in_interior(2, make_coords({0})));  // [0, 1/4] touches the boundary
  auto rep = validate_closed_set_name(a, 6, 300, 5);
  CHECK(rep.ok);
}

TEST_CASE("sup-ball set name accepts the center block") {
  ExprPtr g = ex::sub(ex::max({ex::abs(ex::var(1)), ex::abs(ex::var(2))}), ex::constant(3));
  ClosedSetName ball = ClosedSetName::from_constraints(2, {g});
  CHECK(ball.in_interior(1, make_coords({0, 0})));   // [0,1/2]^2, sup-norm <= 1/2
  CHECK(ball.in_exterior(2, make_coords({14, 0})));  // [3.5, 3.75] x [0, 1/4]
  CHECK(!ball.in_exterior(2, make_coords({11, 0})));  // [2.75, 3] touches the ball
  auto rep = validate_closed_set_name(ball, 5, 200, 6);
  CHECK(rep.ok);
}

TEST_CASE("empty constraint list is the whole space") {
  ClosedSetName all = ClosedSetName::from_constraints(1, {});
  CubeSet interior = all.interior_cubes(1);
  CHECK(interior.size() == 10);  // every window cube at stage 1
  CHECK(all.exterior_cubes(1).empty());
}

TEST_CASE("hereditary membership flows to children") {
  ClosedSetName a = ClosedSetName::from_constraints(1, {ex::neg(ex::var(1))});
  REQUIRE(a.in_interior(2, make_coords({2})));  // [1/2, 3/4]
  // Children and grandchildren inherit regardless of their own margins.
  CHECK(a.in_interior(3, make_coords({4})));
  CHECK(a.in_interior(3, make_coords({5})));
  CHECK(a.in_interior(4, make_coords({8})));
  CHECK(a.in_interior(4, make_coords({11})));
}

TEST_CASE("points strictly inside eventually land in the interior cubes") {
  // Hand-picked well-conditioned constraint; the eventual-coverage stage is
  // small and deterministic.
  ClosedSetName half = ClosedSetName::from_constraints(1, {ex::neg(ex::var(1))});
  std::vector<mpq_class> x{make_rational(1, 3)};
  bool landed = false;
  for (int n = 0; n <= 6 && !landed; ++n) {
    std::vector<std::pair<mpq_class, mpq_class>> degenerate{{x[0], x[0]}};
    CubeSet covering = rasterize_rational_box(n, 1, degenerate);
    bool all_in = true;
    covering.for_each([&](const CubeCoords& c) {
      if (!half.in_interior(n, c)) all_in = false;
    });
    if (all_in) landed = true;
  }
  CHECK(landed);
}

TEST_CASE("memoized values are stable under concurrent queries") {
  std::vector<ExprPtr> g{
      ex::add(ex::sub(ex::mul(ex::var(1), ex::var(1)), ex::mul(ex::var(2), ex::var(2))),
              ex::constant(-1)),
      ex::mul(ex::constant(2), ex::mul(ex::var(1), ex::var(2)))};
  FunctionName f = FunctionName::from_components(g);
  std::vector<std::vector<CubeCoords>> results(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&results, &f, t]() {
      for (int k = -8; k < 8; ++k) {
        const auto& v = f.value(3, make_coords({k, -k}));
        if (!v.out_of_window)
          results[t].insert(results[t].end(), v.cubes.begin(), v.cubes.end());
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(results[0] == results[1]);
  CHECK(results[1] == results[2]);
  CHECK(results[2] == results[3]);
}
