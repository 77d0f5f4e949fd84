#pragma once

// Scalar fields used by the algebra.
//
// ExactScalar lives in Q(t)(i) with t = sqrt(q); the square root is needed once
// the U_q actions enter (k pairs to q^{+-1/2}).  FloatScalar is a complex mpfr
// number whose precision is fixed per session.

#include <gmpxx.h>

#include <boost/multiprecision/mpfr.hpp>

#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qsphere {

using Rational = mpq_class;
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

inline Rational parseRational(std::string_view text) {
  std::string s(text);
  auto strip = [](std::string& v) {
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.erase(v.begin());
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.pop_back();
  };
  strip(s);
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto dot = s.find_first_of(".eE");
  if (dot != std::string::npos) {
    // decimal literal, converted exactly: "0.125" -> 1/8
    std::string mant = s, expo;
    auto e = s.find_first_of("eE");
    if (e != std::string::npos) {
      mant = s.substr(0, e);
      expo = s.substr(e + 1);
    }
    bool neg = !mant.empty() && mant[0] == '-';
    if (!mant.empty() && (mant[0] == '-' || mant[0] == '+')) mant.erase(mant.begin());
    auto p = mant.find('.');
    std::string digits = mant;
    long scale = 0;
    if (p != std::string::npos) {
      digits = mant.substr(0, p) + mant.substr(p + 1);
      scale = static_cast<long>(mant.size() - p - 1);
    }
    if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos)
      throw std::invalid_argument("malformed decimal literal: " + s);
    if (!expo.empty()) scale -= std::stol(expo);
    mpz_class num(digits, 10);
    mpz_class ten = 10, pw;
    mpz_pow_ui(pw.get_mpz_t(), ten.get_mpz_t(), static_cast<unsigned long>(std::labs(scale)));
    Rational r = scale >= 0 ? Rational(num, pw) : Rational(num * pw);
    r.canonicalize();
    return neg ? Rational(-r) : r;
  }
  for (char c : s)
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-' || c == '+'))
      throw std::invalid_argument("malformed rational literal: " + s);
  if (s[0] == '+') s.erase(s.begin());
  Rational r;
  if (r.set_str(s, 10) != 0) throw std::invalid_argument("malformed rational literal: " + s);
  if (r.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
  r.canonicalize();
  return r;
}

inline std::string toString(const Rational& r) { return r.get_str(); }

// nearest double; mpq_get_d truncates
inline double toDouble(const Rational& r) {
  mpfr_t x;
  mpfr_init2(x, 53);
  mpfr_set_q(x, r.get_mpq_t(), MPFR_RNDN);
  double d = mpfr_get_d(x, MPFR_RNDN);
  mpfr_clear(x);
  return d;
}

inline Rational rationalPow(const Rational& base, int e) {
  if (e == 0) return Rational(1);
  Rational b = base;
  if (e < 0) {
    if (sgn(b) == 0) throw std::domain_error("zero to a negative power");
    b = 1 / b;
    e = -e;
  }
  mpz_class n, d;
  mpz_pow_ui(n.get_mpz_t(), b.get_num_mpz_t(), static_cast<unsigned long>(e));
  mpz_pow_ui(d.get_mpz_t(), b.get_den_mpz_t(), static_cast<unsigned long>(e));
  Rational r(n, d);
  r.canonicalize();
  return r;
}

// Q(sqrt q); interned so scalars can carry a raw pointer.
struct QuadraticField {
  Rational q;
  bool sqrtRational = false;
  Rational sqrtValue;
  double qDouble = 0;
  double sqrtDouble = 0;

  static const QuadraticField* intern(const Rational& q) {
    static std::mutex mu;
    static std::map<std::string, std::unique_ptr<QuadraticField>> table;
    std::lock_guard lock(mu);
    auto key = q.get_str();
    auto it = table.find(key);
    if (it != table.end()) return it->second.get();
    auto f = std::make_unique<QuadraticField>();
    f->q = q;
    f->qDouble = toDouble(q);
    f->sqrtDouble = std::sqrt(f->qDouble);
    if (sgn(q) >= 0 && mpz_perfect_square_p(q.get_num_mpz_t()) &&
        mpz_perfect_square_p(q.get_den_mpz_t())) {
      mpz_class n, d;
      mpz_sqrt(n.get_mpz_t(), q.get_num_mpz_t());
      mpz_sqrt(d.get_mpz_t(), q.get_den_mpz_t());
      f->sqrtRational = true;
      f->sqrtValue = Rational(n, d);
      f->sqrtValue.canonicalize();
    }
    auto* raw = f.get();
    table.emplace(key, std::move(f));
    return raw;
  }
};

// (re + reT*t) + i*(im + imT*t),  t*t = q
class ExactScalar {
 public:
  ExactScalar() = default;
  ExactScalar(long v) : c_{Rational(v), 0, 0, 0} {}  // NOLINT: literals read naturally
  ExactScalar(const Rational& r) : c_{r, 0, 0, 0} { c_[0].canonicalize(); }  // NOLINT

  static ExactScalar sqrtq(const QuadraticField* f) {
    if (f->sqrtRational) return ExactScalar(f->sqrtValue);
    ExactScalar s;
    s.c_[1] = 1;
    s.field_ = f;
    return s;
  }
  static ExactScalar imaginaryUnit() {
    ExactScalar s;
    s.c_[2] = 1;
    return s;
  }
  static ExactScalar fromParts(const Rational& re, const Rational& reT, const Rational& im,
                               const Rational& imT, const QuadraticField* f) {
    ExactScalar s;
    s.c_[0] = re;
    s.c_[1] = reT;
    s.c_[2] = im;
    s.c_[3] = imT;
    for (auto& c : s.c_) c.canonicalize();
    s.field_ = f;
    if ((sgn(reT) != 0 || sgn(imT) != 0) && f == nullptr)
      throw std::invalid_argument("sqrt(q) component without a field");
    if (f && f->sqrtRational) {
      s.c_[0] += reT * f->sqrtValue;
      s.c_[2] += imT * f->sqrtValue;
      s.c_[1] = 0;
      s.c_[3] = 0;
    }
    return s;
  }

  const Rational& re() const { return c_[0]; }
  const Rational& reSqrt() const { return c_[1]; }
  const Rational& im() const { return c_[2]; }
  const Rational& imSqrt() const { return c_[3]; }
  const QuadraticField* field() const { return field_; }

  bool isZero() const {
    return sgn(c_[0]) == 0 && sgn(c_[1]) == 0 && sgn(c_[2]) == 0 && sgn(c_[3]) == 0;
  }
  bool isRational() const { return sgn(c_[1]) == 0 && sgn(c_[2]) == 0 && sgn(c_[3]) == 0; }
  bool isReal() const { return sgn(c_[2]) == 0 && sgn(c_[3]) == 0; }

  ExactScalar conj() const {
    ExactScalar s = *this;
    s.c_[2] = -s.c_[2];
    s.c_[3] = -s.c_[3];
    return s;
  }

  ExactScalar& operator+=(const ExactScalar& o) {
    for (int k = 0; k < 4; ++k)
      if (sgn(o.c_[k]) != 0) c_[k] += o.c_[k];
    if (!field_) field_ = o.field_;
    return *this;
  }
  ExactScalar& operator-=(const ExactScalar& o) {
    for (int k = 0; k < 4; ++k)
      if (sgn(o.c_[k]) != 0) c_[k] -= o.c_[k];
    if (!field_) field_ = o.field_;
    return *this;
  }
  ExactScalar operator-() const {
    ExactScalar s = *this;
    for (auto& c : s.c_) c = -c;
    return s;
  }
  friend ExactScalar operator+(ExactScalar a, const ExactScalar& b) { return a += b; }
  friend ExactScalar operator-(ExactScalar a, const ExactScalar& b) { return a -= b; }

  friend ExactScalar operator*(const ExactScalar& x, const ExactScalar& y) {
    if (x.isRational() && y.isRational()) {
      ExactScalar r(Rational(x.c_[0] * y.c_[0]));
      r.field_ = x.field_ ? x.field_ : y.field_;
      return r;
    }
    const QuadraticField* f = x.field_ ? x.field_ : y.field_;
    ExactScalar r;
    r.field_ = f;
    // (x0 + x1 t)(y0 + y1 t) accumulated into (out0, out1) with sign
    auto acc = [&](const Rational& x0, const Rational& x1, const Rational& y0, const Rational& y1,
                   Rational& o0, Rational& o1, bool negate) {
      Rational p0, p1;
      if (sgn(x0) && sgn(y0)) p0 += x0 * y0;
      if (sgn(x1) && sgn(y1)) p0 += x1 * y1 * f->q;
      if (sgn(x0) && sgn(y1)) p1 += x0 * y1;
      if (sgn(x1) && sgn(y0)) p1 += x1 * y0;
      if (negate) {
        o0 -= p0;
        o1 -= p1;
      } else {
        o0 += p0;
        o1 += p1;
      }
    };
    acc(x.c_[0], x.c_[1], y.c_[0], y.c_[1], r.c_[0], r.c_[1], false);
    acc(x.c_[2], x.c_[3], y.c_[2], y.c_[3], r.c_[0], r.c_[1], true);
    acc(x.c_[0], x.c_[1], y.c_[2], y.c_[3], r.c_[2], r.c_[3], false);
    acc(x.c_[2], x.c_[3], y.c_[0], y.c_[1], r.c_[2], r.c_[3], false);
    return r;
  }
  ExactScalar& operator*=(const ExactScalar& o) { return *this = *this * o; }

  ExactScalar inverse() const {
    if (isZero()) throw std::domain_error("division by zero scalar");
    if (isRational()) {
      ExactScalar r(Rational(1 / c_[0]));
      r.field_ = field_;
      return r;
    }
    // |z|^2 = u + v t,  (u + v t)^{-1} = (u - v t) / (u^2 - v^2 q)
    Rational q = field_ ? field_->q : Rational(0);
    Rational u = c_[0] * c_[0] + c_[2] * c_[2] + (c_[1] * c_[1] + c_[3] * c_[3]) * q;
    Rational v = 2 * (c_[0] * c_[1] + c_[2] * c_[3]);
    Rational den = u * u - v * v * q;
    ExactScalar inv = fromParts(u / den, -v / den, 0, 0, field_);
    return conj() * inv;
  }
  friend ExactScalar operator/(const ExactScalar& a, const ExactScalar& b) {
    if (b.isRational() && a.isRational()) {
      if (sgn(b.c_[0]) == 0) throw std::domain_error("division by zero scalar");
      ExactScalar r(Rational(a.c_[0] / b.c_[0]));
      r.field_ = a.field_ ? a.field_ : b.field_;
      return r;
    }
    return a * b.inverse();
  }
  ExactScalar& operator/=(const ExactScalar& o) { return *this = *this / o; }

  friend bool operator==(const ExactScalar& a, const ExactScalar& b) {
    return a.c_[0] == b.c_[0] && a.c_[1] == b.c_[1] && a.c_[2] == b.c_[2] && a.c_[3] == b.c_[3];
  }

  // exact sign of the real part re + reT*t
  int realSign() const { return signOf(c_[0], c_[1]); }

  std::complex<double> toComplex() const {
    double t = field_ ? field_->sqrtDouble : 0.0;
    if (sgn(c_[1]) == 0 && sgn(c_[3]) == 0) return {toDouble(c_[0]), toDouble(c_[2])};
    return {toDouble(c_[0]) + toDouble(c_[1]) * t, toDouble(c_[2]) + toDouble(c_[3]) * t};
  }
  double magnitude() const { return std::abs(toComplex()); }

  std::string str() const {
    auto part = [](const Rational& r0, const Rational& r1) {
      std::string s;
      if (sgn(r0) != 0) s = r0.get_str();
      if (sgn(r1) != 0) {
        if (!s.empty()) s += sgn(r1) > 0 ? " + " : " - ";
        else if (sgn(r1) < 0) s += "-";
        Rational a = abs(r1);
        if (a != 1) s += a.get_str() + "*";
        s += "sqrtq";
      }
      return s;
    };
    std::string re = part(c_[0], c_[1]), im = part(c_[2], c_[3]);
    if (im.empty()) return re.empty() ? "0" : re;
    std::string imTerm = "(" + im + ")*i";
    return re.empty() ? imTerm : "(" + re + ") + " + imTerm;
  }

 private:
  int signOf(const Rational& x0, const Rational& x1) const {
    int s0 = sgn(x0), s1 = sgn(x1);
    if (s1 == 0) return s0;
    if (s0 == 0 || s0 == s1) return s1;
    // opposite signs: compare x0^2 with x1^2 q
    Rational lhs = x0 * x0, rhs = x1 * x1 * field_->q;
    int c = cmp(lhs, rhs);
    if (c == 0) return 0;
    return c > 0 ? s0 : s1;
  }

  Rational c_[4];
  const QuadraticField* field_ = nullptr;
};

class FloatScalar {
 public:
  FloatScalar() : re_(0), im_(0) {}
  FloatScalar(long v) : re_(v), im_(0) {}  // NOLINT
  FloatScalar(const Real& r) : re_(r), im_(0) {}  // NOLINT
  FloatScalar(const Real& r, const Real& i) : re_(r), im_(i) {}
  FloatScalar(const Rational& r)  // NOLINT
      : re_(Real(r.get_num().get_str()) / Real(r.get_den().get_str())), im_(0) {}

  static FloatScalar imaginaryUnit() { return FloatScalar(Real(0), Real(1)); }

  const Real& re() const { return re_; }
  const Real& im() const { return im_; }

  // cancellation residue below this is treated as zero
  static Real tolerance() {
    int digits = static_cast<int>(Real::default_precision());
    return boost::multiprecision::pow(Real(10), -(digits - 8));
  }
  bool isZero() const {
    auto tol = tolerance();
    return abs(re_) <= tol && abs(im_) <= tol;
  }
  bool isReal() const { return abs(im_) <= tolerance(); }

  FloatScalar conj() const { return {re_, Real(-im_)}; }
  FloatScalar operator-() const { return {Real(-re_), Real(-im_)}; }
  FloatScalar& operator+=(const FloatScalar& o) {
    re_ += o.re_;
    im_ += o.im_;
    return *this;
  }
  FloatScalar& operator-=(const FloatScalar& o) {
    re_ -= o.re_;
    im_ -= o.im_;
    return *this;
  }
  friend FloatScalar operator+(FloatScalar a, const FloatScalar& b) { return a += b; }
  friend FloatScalar operator-(FloatScalar a, const FloatScalar& b) { return a -= b; }
  friend FloatScalar operator*(const FloatScalar& a, const FloatScalar& b) {
    if (a.im_ == 0 && b.im_ == 0) return FloatScalar(Real(a.re_ * b.re_));
    return {Real(a.re_ * b.re_ - a.im_ * b.im_), Real(a.re_ * b.im_ + a.im_ * b.re_)};
  }
  FloatScalar& operator*=(const FloatScalar& o) { return *this = *this * o; }
  friend FloatScalar operator/(const FloatScalar& a, const FloatScalar& b) {
    if (b.re_ == 0 && b.im_ == 0) throw std::domain_error("division by zero scalar");
    if (b.im_ == 0) return {Real(a.re_ / b.re_), Real(a.im_ / b.re_)};
    Real d = b.re_ * b.re_ + b.im_ * b.im_;
    return {Real((a.re_ * b.re_ + a.im_ * b.im_) / d), Real((a.im_ * b.re_ - a.re_ * b.im_) / d)};
  }
  FloatScalar& operator/=(const FloatScalar& o) { return *this = *this / o; }

  // equality up to the session tolerance, relative to magnitude
  friend bool operator==(const FloatScalar& a, const FloatScalar& b) {
    Real scale = 1 + abs(a.re_) + abs(a.im_);
    auto tol = tolerance() * scale;
    return abs(a.re_ - b.re_) <= tol && abs(a.im_ - b.im_) <= tol;
  }

  int realSign() const {
    if (abs(re_) <= tolerance()) return 0;
    return re_ > 0 ? 1 : -1;
  }
  std::complex<double> toComplex() const {
    return {static_cast<double>(re_), static_cast<double>(im_)};
  }
  double magnitude() const { return std::abs(toComplex()); }

  std::string str() const {
    auto digits = static_cast<std::streamsize>(Real::default_precision());
    std::string r = re_.str(digits);
    if (im_ == 0) return r;
    return "(" + r + ") + (" + im_.str(digits) + ")*i";
  }

 private:
  Real re_, im_;
};

template <class S>
inline constexpr bool isExact = std::is_same_v<S, ExactScalar>;

// Residual test: literal zero in exact mode, half the working digits otherwise.
inline bool negligible(const ExactScalar& v, double = 1.0, double = 0.5) { return v.isZero(); }
inline bool negligible(const FloatScalar& v, double scale = 1.0, double digitFraction = 0.5) {
  double digits = static_cast<double>(Real::default_precision());
  return v.magnitude() <= std::pow(10.0, -digits * digitFraction) * std::max(1.0, scale);
}

// Per-session scalar factory: knows q and how to build q-powers.
template <class S>
class ScalarContext;

template <>
class ScalarContext<ExactScalar> {
 public:
  explicit ScalarContext(const Rational& q) : field_(QuadraticField::intern(q)) {
    if (sgn(q) <= 0 || q > 1) throw std::invalid_argument("q must lie in (0, 1]");
  }

  const QuadraticField* field() const { return field_; }
  const Rational& qRational() const { return field_->q; }
  double qDouble() const { return field_->qDouble; }
  bool qIsOne() const { return field_->q == 1; }
  std::string qString() const { return field_->q.get_str(); }
  static constexpr const char* modeName() { return "exact"; }

  ExactScalar zero() const { return ExactScalar(); }
  ExactScalar one() const { return ExactScalar(1); }
  ExactScalar integer(long v) const { return ExactScalar(v); }
  ExactScalar rational(const Rational& r) const { return ExactScalar(r); }
  ExactScalar imag() const { return ExactScalar::imaginaryUnit(); }
  ExactScalar sqrtq() const { return ExactScalar::sqrtq(field_); }
  ExactScalar qpow(int k) const { return ExactScalar(rationalPow(field_->q, k)); }
  // q^{k/2}
  ExactScalar halfpow(int k) const {
    int whole = k >= 0 ? k / 2 : -((-k + 1) / 2);
    ExactScalar r(rationalPow(field_->q, whole));
    if (k - 2 * whole == 1) r = r * sqrtq();
    return r;
  }
  // exact conversion of a double pair (every double is a dyadic rational)
  ExactScalar fromComplexDouble(std::complex<double> z) const {
    return ExactScalar::fromParts(Rational(z.real()), 0, Rational(z.imag()), 0, field_);
  }

 private:
  const QuadraticField* field_;
};

template <>
class ScalarContext<FloatScalar> {
 public:
  // q is parsed only after the working precision is in force
  explicit ScalarContext(const std::string& qText, int digits = 50) : digits_(digits) {
    Real::default_precision(static_cast<unsigned>(digits));
    auto slash = qText.find('/');
    if (slash == std::string::npos)
      q_ = Real(qText);
    else
      q_ = Real(qText.substr(0, slash)) / Real(qText.substr(slash + 1));
    if (q_ <= 0 || q_ > 1) throw std::invalid_argument("q must lie in (0, 1]");
    sqrtq_ = boost::multiprecision::sqrt(q_);
    qExact_ = parseRational(qText);
  }

  const Real& qReal() const { return q_; }
  // the literal q was given as; decimals are exact rationals too
  const Rational& qRational() const { return qExact_; }
  double qDouble() const { return static_cast<double>(q_); }
  bool qIsOne() const { return q_ == 1; }
  int digits() const { return digits_; }
  std::string qString() const { return q_.str(static_cast<std::streamsize>(digits_)); }
  static constexpr const char* modeName() { return "float"; }

  FloatScalar zero() const { return FloatScalar(); }
  FloatScalar one() const { return FloatScalar(1); }
  FloatScalar integer(long v) const { return FloatScalar(v); }
  FloatScalar rational(const Rational& r) const { return FloatScalar(r); }
  FloatScalar imag() const { return FloatScalar::imaginaryUnit(); }
  FloatScalar sqrtq() const { return FloatScalar(sqrtq_); }
  FloatScalar qpow(int k) const { return FloatScalar(Real(boost::multiprecision::pow(q_, k))); }
  FloatScalar halfpow(int k) const {
    return FloatScalar(Real(boost::multiprecision::pow(sqrtq_, k)));
  }
  FloatScalar fromComplexDouble(std::complex<double> z) const {
    return FloatScalar(Real(z.real()), Real(z.imag()));
  }

 private:
  int digits_;
  Real q_, sqrtq_;
  Rational qExact_;
};

}  // namespace qsphere
