#pragma once

// Exact rational arithmetic for costs, values, charges and payments.

#include <gmpxx.h>

#include <cctype>
#include <compare>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dsm {

/// Signed exact rational (totals, utilities, gains).
using Rational = mpq_class;

class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Parses "num/den" or an integer "num". The result is canonicalized.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw ParseError("empty rational literal");
  for (char c : s) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-')) {
      throw ParseError("malformed rational literal: '" + s + "'");
    }
  }
  Rational q;
  if (q.set_str(s, 10) != 0) throw ParseError("malformed rational literal: '" + s + "'");
  if (q.get_den() == 0) throw ParseError("zero denominator in '" + s + "'");
  q.canonicalize();
  return q;
}

/// Always "num/den", including "/1" for integers.
inline std::string format_rational(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Nonnegative exact amount of currency.
class Money {
 public:
  Money() = default;
  explicit Money(const Rational& q) : q_(q) {
    q_.canonicalize();
    if (sgn(q_) < 0) throw std::invalid_argument("negative money amount: " + format_rational(q_));
  }
  explicit Money(long n) : Money(Rational(n)) {}
  Money(long num, unsigned long den) : Money(Rational(num, den)) {}

  static Money parse(std::string_view text) { return Money(parse_rational(text)); }

  const Rational& value() const { return q_; }
  std::string str() const { return format_rational(q_); }
  double approx() const { return q_.get_d(); }

  friend bool operator==(const Money& a, const Money& b) { return cmp(a.q_, b.q_) == 0; }
  friend std::strong_ordering operator<=>(const Money& a, const Money& b) {
    int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  Rational q_{0};
};

namespace detail {

inline mpz_class pow10(unsigned e) {
  mpz_class r;
  mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
  return r;
}

inline mpz_class floor_cbrt(const mpz_class& n) {
  mpz_class r;
  mpz_root(r.get_mpz_t(), n.get_mpz_t(), 3);
  return r;
}

}  // namespace detail

/// Rational bracket [lower, upper] around x^{1/3} with upper - lower <= 10^-12.
struct CubeRootBounds {
  Rational lower;
  Rational upper;
};

inline CubeRootBounds cube_root_bounds(const Rational& x) {
  if (sgn(x) < 0) throw std::invalid_argument("cube root of a negative rational");
  // Exact when numerator and denominator are both perfect cubes.
  mpz_class num_root, den_root;
  if (mpz_root(num_root.get_mpz_t(), x.get_num_mpz_t(), 3) != 0 &&
      mpz_root(den_root.get_mpz_t(), x.get_den_mpz_t(), 3) != 0) {
    Rational r(num_root, den_root);
    r.canonicalize();
    return {r, r};
  }
  constexpr unsigned kDigits = 12;
  const mpz_class scale = detail::pow10(kDigits);
  const mpz_class scale3 = detail::pow10(3 * kDigits);
  mpz_class num = x.get_num() * scale3;
  mpz_class lo_n, hi_n;
  mpz_fdiv_q(lo_n.get_mpz_t(), num.get_mpz_t(), x.get_den().get_mpz_t());
  mpz_cdiv_q(hi_n.get_mpz_t(), num.get_mpz_t(), x.get_den().get_mpz_t());
  mpz_class lo_r = detail::floor_cbrt(lo_n);
  mpz_class hi_r = detail::floor_cbrt(hi_n);
  if (hi_r * hi_r * hi_r != hi_n) hi_r += 1;
  CubeRootBounds b{Rational(lo_r, scale), Rational(hi_r, scale)};
  b.lower.canonicalize();
  b.upper.canonicalize();
  return b;
}

inline mpz_class ceil_rational(const Rational& q) {
  mpz_class r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

}  // namespace dsm
