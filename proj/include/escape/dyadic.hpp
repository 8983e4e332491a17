#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace escape {

// Dyadic rational mantissa * 2^exponent, canonical form (mantissa odd or
// zero, zero has exponent 0). Closed under +, -, *; division needs rounding.
// Mantissas up to 62 bits live inline; wider ones spill to a shared GMP
// integer, so the arithmetic the stage loops hammer on never allocates.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(long v) : small_(v) { normalize_small(); }
  Dyadic(const mpz_class& mantissa, long exponent);

  static Dyadic power_of_two(long e) { return Dyadic(std::int64_t(1), e); }
  static Dyadic from_parts(std::int64_t mantissa, long exponent) {
    return Dyadic(mantissa, exponent);
  }

  mpz_class mantissa() const;
  long exponent() const { return exp_; }

  bool is_zero() const { return !big_ && small_ == 0; }
  int sign() const {
    if (big_) return sgn(*big_);
    return small_ < 0 ? -1 : (small_ > 0 ? 1 : 0);
  }

  Dyadic operator-() const;
  Dyadic abs() const { return sign() < 0 ? -*this : *this; }

  friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
  friend Dyadic operator*(const Dyadic& a, const Dyadic& b);

  // -1, 0, +1 as *this <=> other.
  int compare(const Dyadic& o) const;

  friend bool operator<(const Dyadic& a, const Dyadic& b) { return a.compare(b) < 0; }
  friend bool operator<=(const Dyadic& a, const Dyadic& b) { return a.compare(b) <= 0; }
  friend bool operator>(const Dyadic& a, const Dyadic& b) { return a.compare(b) > 0; }
  friend bool operator>=(const Dyadic& a, const Dyadic& b) { return a.compare(b) >= 0; }
  friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.compare(b) == 0; }
  friend bool operator!=(const Dyadic& a, const Dyadic& b) { return a.compare(b) != 0; }

  static const Dyadic& min(const Dyadic& a, const Dyadic& b) { return a <= b ? a : b; }
  static const Dyadic& max(const Dyadic& a, const Dyadic& b) { return a >= b ? a : b; }

  mpq_class to_rational() const;
  double to_double() const { return to_rational().get_d(); }

  // floor(value * 2^p) / ceil(value * 2^p) as exact integers; the i64
  // variants return nothing when the result does not fit.
  mpz_class floor_scaled(long p) const;
  mpz_class ceil_scaled(long p) const;
  std::optional<std::int64_t> floor_scaled_i64(long p) const;
  std::optional<std::int64_t> ceil_scaled_i64(long p) const;

  // Largest/smallest multiple of 2^-p that is <=/>= the rational v.
  static Dyadic round_down(const mpq_class& v, long p);
  static Dyadic round_up(const mpq_class& v, long p);

  // a/b rounded down/up to p fractional bits. b must be nonzero.
  static Dyadic div_down(const Dyadic& a, const Dyadic& b, long p);
  static Dyadic div_up(const Dyadic& a, const Dyadic& b, long p);

  std::string to_string() const;  // exact, as "m*2^e" or plain integer

 private:
  Dyadic(std::int64_t small, long exp) : small_(small), exp_(exp) { normalize_small(); }

  void normalize_small();
  bool is_small() const { return !big_; }
  static Dyadic from_i128(__int128 v, long exp);
  static Dyadic from_mpz(mpz_class v, long exp);

  std::int64_t small_ = 0;  // valid when big_ is null
  long exp_ = 0;
  std::shared_ptr<const mpz_class> big_;
};

// Closed interval with dyadic endpoints, lo <= hi.
struct DyadicInterval {
  Dyadic lo;
  Dyadic hi;

  DyadicInterval() = default;
  DyadicInterval(Dyadic l, Dyadic h);
  static DyadicInterval point(const Dyadic& v) { return DyadicInterval(v, v); }
  // Skips the lo <= hi check; for operations ordered by construction.
  static DyadicInterval unchecked(Dyadic l, Dyadic h) {
    DyadicInterval iv;
    iv.lo = std::move(l);
    iv.hi = std::move(h);
    return iv;
  }

  Dyadic width() const { return hi - lo; }
  bool contains_zero() const { return lo.sign() <= 0 && hi.sign() >= 0; }
  bool contains(const mpq_class& v) const;
  bool contains(const DyadicInterval& inner) const {
    return lo <= inner.lo && inner.hi <= hi;
  }

  DyadicInterval padded(const Dyadic& r) const { return DyadicInterval(lo - r, hi + r); }
};

DyadicInterval iv_add(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval iv_sub(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval iv_neg(const DyadicInterval& a);
DyadicInterval iv_mul(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval iv_abs(const DyadicInterval& a);
DyadicInterval iv_min(const DyadicInterval& a, const DyadicInterval& b);
DyadicInterval iv_max(const DyadicInterval& a, const DyadicInterval& b);
// Empty when the denominator contains zero (DivisionIndeterminate).
std::optional<DyadicInterval> iv_div(const DyadicInterval& a, const DyadicInterval& b,
                                     long precision_bits);

using Box = std::vector<DyadicInterval>;

// Exact rational helpers used by constructors and oracles.
mpq_class make_rational(const mpz_class& num, const mpz_class& den);
mpq_class rational_abs(const mpq_class& v);
mpq_class rational_sup_norm(const std::vector<mpq_class>& v);

}  // namespace escape
