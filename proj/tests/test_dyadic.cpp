#include <random>

#include "doctest.h"
#include "escape/dyadic.hpp"

using namespace escape;

namespace {

mpq_class rq(long p, long q = 1) { return make_rational(p, q); }

Dyadic dy(long man, long exp = 0) { return Dyadic(mpz_class(man), exp); }

// Random dyadic with small mantissa, exponent in [-8, 4].
Dyadic random_dyadic(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> man(-512, 512);
  std::uniform_int_distribution<long> exp(-8, 4);
  return Dyadic(mpz_class(man(rng)), exp(rng));
}

}  // namespace

TEST_CASE("dyadic canonical form and ordering") {
  CHECK(dy(4) == dy(1, 2));
  CHECK(dy(0, 7).exponent() == 0);
  CHECK(dy(6, -1).mantissa() == 3);  // 6*2^-1 = 3*2^0
  CHECK(dy(1, -1) < dy(1));
  CHECK(dy(-3, -2) < dy(0));
  CHECK(dy(5, -3) == dy(5, -3));
  CHECK(dy(1, 10) > dy(1023));
}

TEST_CASE("dyadic arithmetic agrees with exact rationals") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    Dyadic a = random_dyadic(rng), b = random_dyadic(rng);
    mpq_class qa = a.to_rational(), qb = b.to_rational();
    CHECK((a + b).to_rational() == qa + qb);
    CHECK((a - b).to_rational() == qa - qb);
    CHECK((a * b).to_rational() == qa * qb);
    CHECK(a.compare(b) == (qa < qb ? -1 : (qa > qb ? 1 : 0)));
  }
}

TEST_CASE("rounding brackets the exact value and tightens with precision") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<long> num(-4000, 4000);
  std::uniform_int_distribution<long> den(1, 97);
  for (int i = 0; i < 1000; ++i) {
    mpq_class v = rq(num(rng), den(rng));
    for (long p : {0L, 3L, 10L}) {
      Dyadic lo = Dyadic::round_down(v, p), hi = Dyadic::round_up(v, p);
      CHECK(lo.to_rational() <= v);
      CHECK(v <= hi.to_rational());
      CHECK(hi.to_rational() - lo.to_rational() <= rq(1, 1L << p));
      Dyadic lo2 = Dyadic::round_down(v, p + 4), hi2 = Dyadic::round_up(v, p + 4);
      CHECK(lo.to_rational() <= lo2.to_rational());  // finer never widens
      CHECK(hi2.to_rational() <= hi.to_rational());
    }
  }
}

TEST_CASE("outward division brackets the exact quotient") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 1000; ++i) {
    Dyadic a = random_dyadic(rng), b = random_dyadic(rng);
    if (b.is_zero()) continue;
    mpq_class exact = a.to_rational() / b.to_rational();
    Dyadic lo = Dyadic::div_down(a, b, 8), hi = Dyadic::div_up(a, b, 8);
    CHECK(lo.to_rational() <= exact);
    CHECK(exact <= hi.to_rational());
    CHECK(hi.to_rational() - lo.to_rational() <= rq(1, 128));
  }
}

TEST_CASE("interval multiplication covers sampled products") {
  // [-1,2] * [-1,2] = [-2,4]: valid but not tight for x*x over the box.
  DyadicInterval a(dy(-1), dy(2));
  DyadicInterval p = iv_mul(a, a);
  CHECK(p.lo == dy(-2));
  CHECK(p.hi == dy(4));
}

TEST_CASE("interval add/sub/min/max/abs endpoints") {
  DyadicInterval a(dy(0), dy(1)), b(dy(1), dy(2));
  CHECK(iv_add(a, b).lo == dy(1));
  CHECK(iv_add(a, b).hi == dy(3));
  CHECK(iv_sub(a, b).lo == dy(-2));
  CHECK(iv_sub(a, b).hi == dy(0));
  DyadicInterval m(dy(-3), dy(1));
  CHECK(iv_abs(m).lo == dy(0));
  CHECK(iv_abs(m).hi == dy(3));
  CHECK(iv_min(a, m).lo == dy(-3));
  CHECK(iv_min(a, m).hi == dy(1));
  CHECK(iv_max(a, m).lo == dy(0));
  CHECK(iv_max(a, m).hi == dy(1));
}

TEST_CASE("interval division flags a zero-straddling denominator") {
  DyadicInterval one = DyadicInterval::point(dy(1));
  DyadicInterval z(dy(-1), dy(1));
  CHECK(!iv_div(one, z, 8).has_value());
  auto q = iv_div(one, DyadicInterval(dy(2), dy(4)), 8);
  REQUIRE(q.has_value());
  CHECK(q->lo.to_rational() <= rq(1, 4));
  CHECK(q->hi.to_rational() >= rq(1, 2));
}

TEST_CASE("interval operations are sound on random samples") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> op_pick(0, 6);
  for (int i = 0; i < 4000; ++i) {
    Dyadic a1 = random_dyadic(rng), a2 = random_dyadic(rng);
    Dyadic b1 = random_dyadic(rng), b2 = random_dyadic(rng);
    DyadicInterval a(Dyadic::min(a1, a2), Dyadic::max(a1, a2));
    DyadicInterval b(Dyadic::min(b1, b2), Dyadic::max(b1, b2));
    // Sample the midpoints; the result interval must contain the exact value.
    mpq_class xa = (a.lo.to_rational() + a.hi.to_rational()) / 2;
    mpq_class xb = (b.lo.to_rational() + b.hi.to_rational()) / 2;
    int op = op_pick(rng);
    std::optional<DyadicInterval> r;
    mpq_class exact;
    switch (op) {
      case 0: r = iv_add(a, b); exact = xa + xb; break;
      case 1: r = iv_sub(a, b); exact = xa - xb; break;
      case 2: r = iv_mul(a, b); exact = xa * xb; break;
      case 3: r = iv_abs(a); exact = rational_abs(xa); break;
      case 4: r = iv_min(a, b); exact = std::min(xa, xb); break;
      case 5: r = iv_max(a, b); exact = std::max(xa, xb); break;
      default:
        r = iv_div(a, b, 12);
        if (!r) continue;
        exact = xa / xb;
        break;
    }
    REQUIRE(r.has_value());
    CHECK(r->contains(exact));
  }
}
