#include "escape/dyadic.hpp"

#include <cassert>
#include <sstream>
#include <stdexcept>

namespace escape {

namespace {

constexpr std::int64_t kSmallMax = (std::int64_t(1) << 62) - 1;

bool fits_small_i128(__int128 v) {
  return v <= __int128(kSmallMax) && v >= -__int128(kSmallMax);
}

int bit_length_u64(std::uint64_t v) { return v == 0 ? 0 : 64 - __builtin_clzll(v); }

// Bits needed for |v| of an int128.
int bit_length_i128(__int128 v) {
  unsigned __int128 m = v < 0 ? -(unsigned __int128)v : (unsigned __int128)v;
  std::uint64_t hi = static_cast<std::uint64_t>(m >> 64);
  if (hi != 0) return 64 + bit_length_u64(hi);
  return bit_length_u64(static_cast<std::uint64_t>(m));
}

mpz_class mpz_from_i128(__int128 v) {
  bool neg = v < 0;
  unsigned __int128 m = neg ? -(unsigned __int128)v : (unsigned __int128)v;
  mpz_class hi(static_cast<unsigned long>(m >> 64));
  mpz_class out;
  mpz_mul_2exp(out.get_mpz_t(), hi.get_mpz_t(), 64);
  out += mpz_class(static_cast<unsigned long>(m & ~0ull));
  if (neg) out = -out;
  return out;
}

}  // namespace

void Dyadic::normalize_small() {
  if (small_ == 0) {
    exp_ = 0;
    return;
  }
  int twos = __builtin_ctzll(static_cast<std::uint64_t>(small_));
  if (twos > 0) {
    small_ >>= twos;  // arithmetic shift keeps the sign
    exp_ += twos;
  }
}

Dyadic Dyadic::from_mpz(mpz_class v, long exp) {
  Dyadic d;
  if (sgn(v) == 0) return d;
  unsigned long twos = mpz_scan1(v.get_mpz_t(), 0);
  if (twos > 0) {
    mpz_fdiv_q_2exp(v.get_mpz_t(), v.get_mpz_t(), twos);
    exp += static_cast<long>(twos);
  }
  if (v.fits_slong_p()) {
    long s = v.get_si();
    if (s <= kSmallMax && s >= -kSmallMax) {
      d.small_ = s;
      d.exp_ = exp;
      return d;
    }
  }
  d.big_ = std::make_shared<const mpz_class>(std::move(v));
  d.exp_ = exp;
  return d;
}

Dyadic Dyadic::from_i128(__int128 v, long exp) {
  if (v == 0) return Dyadic();
  std::uint64_t low = static_cast<std::uint64_t>(v);
  int twos = low == 0 ? 64 + __builtin_ctzll(static_cast<std::uint64_t>(v >> 64))
                      : __builtin_ctzll(low);
  v >>= twos;
  exp += twos;
  if (fits_small_i128(v)) {
    Dyadic d;
    d.small_ = static_cast<std::int64_t>(v);
    d.exp_ = exp;
    return d;
  }
  return from_mpz(mpz_from_i128(v), exp);
}

Dyadic::Dyadic(const mpz_class& mantissa, long exponent) {
  *this = from_mpz(mantissa, exponent);
}

mpz_class Dyadic::mantissa() const {
  if (big_) return *big_;
  return mpz_class(static_cast<long>(small_));
}

Dyadic Dyadic::operator-() const {
  Dyadic r = *this;
  if (r.big_) {
    r.big_ = std::make_shared<const mpz_class>(-*r.big_);
  } else {
    r.small_ = -r.small_;
  }
  return r;
}

Dyadic operator+(const Dyadic& a, const Dyadic& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  long e = std::min(a.exp_, b.exp_);
  long da = a.exp_ - e, db = b.exp_ - e;
  if (a.is_small() && b.is_small()) {
    // Mantissas are odd, so at most one of da, db is nonzero.
    if (da + bit_length_u64(std::uint64_t(a.small_ < 0 ? -a.small_ : a.small_)) < 127 &&
        db + bit_length_u64(std::uint64_t(b.small_ < 0 ? -b.small_ : b.small_)) < 127) {
      __int128 r = ((__int128)a.small_ << da) + ((__int128)b.small_ << db);
      return Dyadic::from_i128(r, e);
    }
  }
  mpz_class ma = a.mantissa(), mb = b.mantissa();
  if (da > 0) mpz_mul_2exp(ma.get_mpz_t(), ma.get_mpz_t(), da);
  if (db > 0) mpz_mul_2exp(mb.get_mpz_t(), mb.get_mpz_t(), db);
  return Dyadic::from_mpz(ma + mb, e);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b) { return a + (-b); }

Dyadic operator*(const Dyadic& a, const Dyadic& b) {
  if (a.is_zero() || b.is_zero()) return Dyadic();
  if (a.is_small() && b.is_small()) {
    __int128 p = (__int128)a.small_ * (__int128)b.small_;
    return Dyadic::from_i128(p, a.exp_ + b.exp_);  // odd*odd stays odd
  }
  return Dyadic::from_mpz(mpz_class(a.mantissa() * b.mantissa()), a.exp_ + b.exp_);
}

int Dyadic::compare(const Dyadic& o) const {
  int sa = sign(), sb = o.sign();
  if (sa != sb) return sa < sb ? -1 : 1;
  if (sa == 0) return 0;
  if (exp_ == o.exp_ && is_small() && o.is_small()) {
    return small_ < o.small_ ? -1 : (small_ > o.small_ ? 1 : 0);
  }
  // Same sign: compare magnitudes via bit lengths first.
  long bits_a = exp_ + (is_small() ? bit_length_u64(std::uint64_t(small_ < 0 ? -small_ : small_))
                                   : (long)mpz_sizeinbase(big_->get_mpz_t(), 2));
  long bits_b =
      o.exp_ + (o.is_small() ? bit_length_u64(std::uint64_t(o.small_ < 0 ? -o.small_ : o.small_))
                             : (long)mpz_sizeinbase(o.big_->get_mpz_t(), 2));
  if (bits_a != bits_b) {
    int mag = bits_a < bits_b ? -1 : 1;
    return sa > 0 ? mag : -mag;
  }
  long e = std::min(exp_, o.exp_);
  long da = exp_ - e, db = o.exp_ - e;
  if (is_small() && o.is_small() && da < 64 && db < 64 &&
      da + bit_length_u64(std::uint64_t(small_ < 0 ? -small_ : small_)) < 127 &&
      db + bit_length_u64(std::uint64_t(o.small_ < 0 ? -o.small_ : o.small_)) < 127) {
    __int128 va = (__int128)small_ << da;
    __int128 vb = (__int128)o.small_ << db;
    return va < vb ? -1 : (va > vb ? 1 : 0);
  }
  mpz_class ma = mantissa(), mb = o.mantissa();
  if (da > 0) mpz_mul_2exp(ma.get_mpz_t(), ma.get_mpz_t(), da);
  if (db > 0) mpz_mul_2exp(mb.get_mpz_t(), mb.get_mpz_t(), db);
  int c = cmp(ma, mb);
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

mpq_class Dyadic::to_rational() const {
  mpz_class man = mantissa();
  if (exp_ >= 0) {
    mpz_mul_2exp(man.get_mpz_t(), man.get_mpz_t(), exp_);
    return mpq_class(man);
  }
  mpz_class den(1);
  mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), -exp_);
  return make_rational(man, den);
}

std::optional<std::int64_t> Dyadic::floor_scaled_i64(long p) const {
  if (!is_small()) return std::nullopt;
  long shift = exp_ + p;
  if (shift >= 0) {
    if (shift + bit_length_u64(std::uint64_t(small_ < 0 ? -small_ : small_)) > 62)
      return std::nullopt;
    return small_ << shift;
  }
  if (-shift >= 64) return small_ < 0 ? -1 : 0;
  return small_ >> (-shift);  // arithmetic shift = floor
}

std::optional<std::int64_t> Dyadic::ceil_scaled_i64(long p) const {
  if (!is_small()) return std::nullopt;
  long shift = exp_ + p;
  if (shift >= 0) {
    if (shift + bit_length_u64(std::uint64_t(small_ < 0 ? -small_ : small_)) > 62)
      return std::nullopt;
    return small_ << shift;
  }
  long s = -shift;
  if (s >= 64) return small_ > 0 ? 1 : 0;
  std::int64_t q = small_ >> s;
  std::int64_t rem = small_ - (q << s);
  return q + (rem != 0 ? 1 : 0);
}

mpz_class Dyadic::floor_scaled(long p) const {
  if (auto v = floor_scaled_i64(p)) return mpz_class(static_cast<long>(*v));
  mpz_class man = mantissa();
  long shift = exp_ + p;
  mpz_class r;
  if (shift >= 0) {
    mpz_mul_2exp(r.get_mpz_t(), man.get_mpz_t(), shift);
  } else {
    mpz_fdiv_q_2exp(r.get_mpz_t(), man.get_mpz_t(), -shift);
  }
  return r;
}

mpz_class Dyadic::ceil_scaled(long p) const {
  if (auto v = ceil_scaled_i64(p)) return mpz_class(static_cast<long>(*v));
  mpz_class man = mantissa();
  long shift = exp_ + p;
  mpz_class r;
  if (shift >= 0) {
    mpz_mul_2exp(r.get_mpz_t(), man.get_mpz_t(), shift);
  } else {
    mpz_cdiv_q_2exp(r.get_mpz_t(), man.get_mpz_t(), -shift);
  }
  return r;
}

Dyadic Dyadic::round_down(const mpq_class& v, long p) {
  // Fast path: numerator and denominator fit machine words.
  if (v.get_num().fits_slong_p() && v.get_den().fits_slong_p()) {
    long num = v.get_num().get_si();
    long den = v.get_den().get_si();
    if (p < 62 && bit_length_u64(std::uint64_t(num < 0 ? -num : num)) + p < 126) {
      __int128 scaled = (__int128)num << p;
      __int128 q = scaled / den;
      if ((scaled % den != 0) && ((scaled < 0) != (den < 0))) --q;  // floor
      return from_i128(q, -p);
    }
  }
  mpz_class num = v.get_num();
  mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), p);
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), v.get_den().get_mpz_t());
  return Dyadic(q, -p);
}

Dyadic Dyadic::round_up(const mpq_class& v, long p) {
  if (v.get_num().fits_slong_p() && v.get_den().fits_slong_p()) {
    long num = v.get_num().get_si();
    long den = v.get_den().get_si();
    if (p < 62 && bit_length_u64(std::uint64_t(num < 0 ? -num : num)) + p < 126) {
      __int128 scaled = (__int128)num << p;
      __int128 q = scaled / den;
      if ((scaled % den != 0) && ((scaled < 0) == (den < 0))) ++q;  // ceil
      return from_i128(q, -p);
    }
  }
  mpz_class num = v.get_num();
  mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), p);
  mpz_class q;
  mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), v.get_den().get_mpz_t());
  return Dyadic(q, -p);
}

namespace {

// floor/ceil of (a/b) * 2^p without leaving machine words when possible.
std::optional<__int128> fast_scaled_quotient(const Dyadic& a, const Dyadic& b, long p,
                                             bool up, std::int64_t a_small,
                                             std::int64_t b_small, long t) {
  // t = a.exp - b.exp + p; quotient = (a_small << t) / b_small when t >= 0,
  // else a_small / (b_small << -t).
  __int128 num = a_small, den = b_small;
  if (t >= 0) {
    if (t + bit_length_u64(std::uint64_t(a_small < 0 ? -a_small : a_small)) > 126)
      return std::nullopt;
    num = (__int128)a_small << t;
  } else {
    if (-t + bit_length_u64(std::uint64_t(b_small < 0 ? -b_small : b_small)) > 126)
      return std::nullopt;
    den = (__int128)b_small << (-t);
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  __int128 q = num / den;
  __int128 r = num % den;
  if (r != 0) {
    if (up && num > 0) ++q;
    if (!up && num < 0) --q;
  }
  return q;
}

mpz_class slow_scaled_quotient(const Dyadic& a, const Dyadic& b, long p, bool up) {
  long t = a.exponent() - b.exponent() + p;
  mpz_class num = a.mantissa(), den = b.mantissa();
  if (t >= 0) {
    mpz_mul_2exp(num.get_mpz_t(), num.get_mpz_t(), t);
  } else {
    mpz_mul_2exp(den.get_mpz_t(), den.get_mpz_t(), -t);
  }
  if (sgn(den) < 0) {
    num = -num;
    den = -den;
  }
  mpz_class q;
  if (up) {
    mpz_cdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  } else {
    mpz_fdiv_q(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  }
  return q;
}

}  // namespace

Dyadic Dyadic::div_down(const Dyadic& a, const Dyadic& b, long p) {
  assert(!b.is_zero());
  if (a.is_zero()) return Dyadic();
  if (a.is_small() && b.is_small()) {
    long t = a.exp_ - b.exp_ + p;
    if (auto q = fast_scaled_quotient(a, b, p, false, a.small_, b.small_, t))
      return from_i128(*q, -p);
  }
  return from_mpz(slow_scaled_quotient(a, b, p, false), -p);
}

Dyadic Dyadic::div_up(const Dyadic& a, const Dyadic& b, long p) {
  assert(!b.is_zero());
  if (a.is_zero()) return Dyadic();
  if (a.is_small() && b.is_small()) {
    long t = a.exp_ - b.exp_ + p;
    if (auto q = fast_scaled_quotient(a, b, p, true, a.small_, b.small_, t))
      return from_i128(*q, -p);
  }
  return from_mpz(slow_scaled_quotient(a, b, p, true), -p);
}

std::string Dyadic::to_string() const {
  std::ostringstream os;
  if (exp_ >= 0) {
    mpz_class m = mantissa();
    mpz_mul_2exp(m.get_mpz_t(), m.get_mpz_t(), exp_);
    os << m.get_str();
  } else {
    os << mantissa().get_str() << "*2^" << exp_;
  }
  return os.str();
}

DyadicInterval::DyadicInterval(Dyadic l, Dyadic h) : lo(std::move(l)), hi(std::move(h)) {
  if (lo > hi) throw std::invalid_argument("DyadicInterval: lo > hi");
}

bool DyadicInterval::contains(const mpq_class& v) const {
  return lo.to_rational() <= v && v <= hi.to_rational();
}

DyadicInterval iv_add(const DyadicInterval& a, const DyadicInterval& b) {
  return DyadicInterval::unchecked(a.lo + b.lo, a.hi + b.hi);
}

DyadicInterval iv_sub(const DyadicInterval& a, const DyadicInterval& b) {
  return DyadicInterval::unchecked(a.lo - b.hi, a.hi - b.lo);
}

DyadicInterval iv_neg(const DyadicInterval& a) {
  return DyadicInterval::unchecked(-a.hi, -a.lo);
}

DyadicInterval iv_mul(const DyadicInterval& a, const DyadicInterval& b) {
  Dyadic p1 = a.lo * b.lo;
  Dyadic p2 = a.lo * b.hi;
  Dyadic p3 = a.hi * b.lo;
  Dyadic p4 = a.hi * b.hi;
  const Dyadic& lo = Dyadic::min(Dyadic::min(p1, p2), Dyadic::min(p3, p4));
  const Dyadic& hi = Dyadic::max(Dyadic::max(p1, p2), Dyadic::max(p3, p4));
  return DyadicInterval::unchecked(lo, hi);
}

DyadicInterval iv_abs(const DyadicInterval& a) {
  if (a.lo.sign() >= 0) return a;
  if (a.hi.sign() <= 0) return iv_neg(a);
  return DyadicInterval::unchecked(Dyadic(), Dyadic::max(-a.lo, a.hi));
}

DyadicInterval iv_min(const DyadicInterval& a, const DyadicInterval& b) {
  return DyadicInterval::unchecked(Dyadic::min(a.lo, b.lo), Dyadic::min(a.hi, b.hi));
}

DyadicInterval iv_max(const DyadicInterval& a, const DyadicInterval& b) {
  return DyadicInterval::unchecked(Dyadic::max(a.lo, b.lo), Dyadic::max(a.hi, b.hi));
}

std::optional<DyadicInterval> iv_div(const DyadicInterval& a, const DyadicInterval& b,
                                     long precision_bits) {
  if (b.contains_zero()) return std::nullopt;
  // 0 not in b: the range of a/b is spanned by the endpoint quotients.
  const Dyadic* as[2] = {&a.lo, &a.hi};
  const Dyadic* bs[2] = {&b.lo, &b.hi};
  bool first = true;
  Dyadic lo, hi;
  for (const Dyadic* x : as) {
    for (const Dyadic* y : bs) {
      Dyadic down = Dyadic::div_down(*x, *y, precision_bits);
      Dyadic up = Dyadic::div_up(*x, *y, precision_bits);
      if (first) {
        lo = down;
        hi = up;
        first = false;
      } else {
        if (down < lo) lo = down;
        if (up > hi) hi = up;
      }
    }
  }
  return DyadicInterval::unchecked(std::move(lo), std::move(hi));
}

mpq_class make_rational(const mpz_class& num, const mpz_class& den) {
  if (sgn(den) == 0) throw std::invalid_argument("make_rational: zero denominator");
  mpq_class q(num, den);
  q.canonicalize();
  return q;
}

mpq_class rational_abs(const mpq_class& v) { return sgn(v) < 0 ? mpq_class(-v) : v; }

mpq_class rational_sup_norm(const std::vector<mpq_class>& v) {
  mpq_class m(0);
  for (const auto& x : v) {
    mpq_class a = rational_abs(x);
    if (a > m) m = a;
  }
  return m;
}

}  // namespace escape
