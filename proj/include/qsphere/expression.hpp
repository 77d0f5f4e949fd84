#pragma once

// Expression grammar, printer and JSON form of algebra elements.
//
//   expr   := term (('+' | '-') term)*
//   term   := unary ('*' unary)*
//   unary  := ('-' | '+') unary | power
//   power  := atom ('^' integer)?
//   atom   := number ('/' number)? | ident | '(' expr ')'
//   ident  := a | as | b | bs | A | B | Bs | i | sqrtq
//
// A, B, Bs expand to bs*b, a*bs, b*as.  `i` and `sqrtq` are extensions so that
// every exact coefficient has a printed form.

#include "qsphere/algebra.hpp"

#include <json.hpp>

#include <cctype>
#include <sstream>
#include <string>
#include <string_view>

namespace qsphere {

struct ParseError : std::runtime_error {
  int line, column;
  ParseError(const std::string& msg, int l, int c)
      : std::runtime_error(msg + " at line " + std::to_string(l) + ", column " + std::to_string(c)),
        line(l),
        column(c) {}
};

template <class S>
class ExpressionParser {
 public:
  using Elem = Element<S>;

  ExpressionParser(const Algebra<S>& alg, std::string_view text) : alg_(alg), text_(text) {}

  Elem parse() {
    skipSpace();
    if (atEnd()) fail("empty expression");
    Elem e = expr();
    skipSpace();
    if (!atEnd()) fail(std::string("unexpected '") + peek() + "'");
    return e;
  }

 private:
  Elem expr() {
    Elem acc = term();
    for (;;) {
      skipSpace();
      if (accept('+')) {
        acc += term();
      } else if (accept('-')) {
        acc -= term();
      } else {
        return acc;
      }
    }
  }
  Elem term() {
    Elem acc = unary();
    for (;;) {
      skipSpace();
      if (!accept('*')) return acc;
      acc = alg_.multiply(acc, unary());
    }
  }
  Elem unary() {
    skipSpace();
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }
  Elem power() {
    Elem base = atom();
    skipSpace();
    if (accept('^')) {
      skipSpace();
      if (atEnd() || !std::isdigit(static_cast<unsigned char>(peek())))
        fail("exponent must be a non-negative integer");
      std::string digits = readWhile([](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
      if (digits.size() > 4) fail("exponent too large");
      return alg_.power(base, std::stoi(digits));
    }
    return base;
  }
  Elem atom() {
    skipSpace();
    if (atEnd()) fail("unexpected end of expression");
    char c = peek();
    if (accept('(')) {
      Elem e = expr();
      skipSpace();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::string num = readWhile([](char ch) { return std::isdigit(static_cast<unsigned char>(ch)) || ch == '.'; });
      Rational r;
      try {
        r = parseRational(num);
      } catch (const std::exception&) {
        fail("malformed number '" + num + "'");
      }
      skipSpace();
      if (peek() == '/' ) {
        ++pos_;
        skipSpace();
        std::string den = readWhile([](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); });
        if (den.empty()) fail("expected denominator");
        Rational d = parseRational(den);
        if (sgn(d) == 0) fail("zero denominator");
        r /= d;
      }
      return alg_.constant(alg_.scalars().rational(r));
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      int startCol = column();
      std::string id = readWhile([](char ch) { return std::isalpha(static_cast<unsigned char>(ch)) != 0; });
      if (id == "a") return alg_.a();
      if (id == "as") return alg_.as();
      if (id == "b") return alg_.b();
      if (id == "bs") return alg_.bs();
      if (id == "A") return alg_.A();
      if (id == "B") return alg_.B();
      if (id == "Bs") return alg_.Bs();
      if (id == "i") return alg_.constant(alg_.scalars().imag());
      if (id == "sqrtq") return alg_.constant(alg_.scalars().sqrtq());
      throw ParseError("unknown identifier '" + id + "'", line(), startCol);
    }
    fail(std::string("unexpected '") + c + "'");
    return {};
  }

  template <class P>
  std::string readWhile(P pred) {
    std::size_t start = pos_;
    while (!atEnd() && pred(text_[pos_])) ++pos_;
    return std::string(text_.substr(start, pos_ - start));
  }
  void skipSpace() {
    while (!atEnd() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool atEnd() const { return pos_ >= text_.size(); }
  char peek() const { return atEnd() ? '\0' : text_[pos_]; }
  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  int line() const {
    int l = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i)
      if (text_[i] == '\n') ++l;
    return l;
  }
  int column() const {
    int c = 1;
    for (std::size_t i = 0; i < pos_ && i < text_.size(); ++i) c = text_[i] == '\n' ? 1 : c + 1;
    return c;
  }
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line(), column()); }

  const Algebra<S>& alg_;
  std::string_view text_;
  std::size_t pos_ = 0;
};

template <class S>
Element<S> parseExpression(const Algebra<S>& alg, std::string_view text) {
  return ExpressionParser<S>(alg, text).parse();
}

inline std::string monomialString(const Monomial& m) {
  std::string s;
  auto factor = [&](const char* name, int e) {
    if (e == 0) return;
    if (!s.empty()) s += "*";
    s += name;
    if (e > 1) s += "^" + std::to_string(e);
  };
  factor(m.aExp >= 0 ? "a" : "as", std::abs(m.aExp));
  factor("b", m.bExp);
  factor("bs", m.bStarExp);
  return s.empty() ? "1" : s;
}

// Printed form re-parses to the same element in exact mode.
template <class S>
std::string toExpressionString(const Element<S>& x) {
  if (x.isZero()) return "0";
  std::string out;
  for (const auto& [m, c] : x.terms()) {
    if (!out.empty()) out += " + ";
    std::string coeff = c.str();
    bool simple = coeff.find_first_of(" *()") == std::string::npos;
    if (!simple) coeff = "(" + coeff + ")";
    if (m.isUnit()) {
      out += coeff;
    } else if (coeff == "1") {
      out += monomialString(m);
    } else {
      out += coeff + "*" + monomialString(m);
    }
  }
  return out;
}

// ---- JSON

inline void putRational(nlohmann::json& j, const char* num, const char* den, const Rational& r) {
  j[num] = r.get_num().get_str();
  j[den] = r.get_den().get_str();
}
inline Rational getRational(const nlohmann::json& j, const char* num, const char* den) {
  auto read = [&](const char* key) -> std::string {
    const auto& v = j.at(key);
    return v.is_string() ? v.get<std::string>() : std::to_string(v.get<long long>());
  };
  Rational r(mpz_class(read(num), 10), mpz_class(read(den), 10));
  r.canonicalize();
  return r;
}

inline nlohmann::json scalarToJson(const ExactScalar& c) {
  nlohmann::json j;
  putRational(j, "coeffNum", "coeffDen", c.re());
  if (sgn(c.im()) != 0) putRational(j, "coeffImNum", "coeffImDen", c.im());
  if (sgn(c.reSqrt()) != 0) putRational(j, "coeffSqrtqNum", "coeffSqrtqDen", c.reSqrt());
  if (sgn(c.imSqrt()) != 0) putRational(j, "coeffImSqrtqNum", "coeffImSqrtqDen", c.imSqrt());
  return j;
}
inline nlohmann::json scalarToJson(const FloatScalar& c) {
  auto digits = static_cast<std::streamsize>(Real::default_precision());
  return {{"coeffRe", c.re().str(digits)}, {"coeffIm", c.im().str(digits)}};
}

inline ExactScalar scalarFromJson(const nlohmann::json& j, const ScalarContext<ExactScalar>& ctx) {
  auto opt = [&](const char* num, const char* den) {
    return j.contains(num) ? getRational(j, num, den) : Rational(0);
  };
  return ExactScalar::fromParts(getRational(j, "coeffNum", "coeffDen"),
                                opt("coeffSqrtqNum", "coeffSqrtqDen"),
                                opt("coeffImNum", "coeffImDen"),
                                opt("coeffImSqrtqNum", "coeffImSqrtqDen"), ctx.field());
}
inline FloatScalar scalarFromJson(const nlohmann::json& j, const ScalarContext<FloatScalar>&) {
  auto read = [&](const char* key) {
    const auto& v = j.at(key);
    return v.is_string() ? Real(v.get<std::string>()) : Real(v.get<double>());
  };
  return FloatScalar(read("coeffRe"), j.contains("coeffIm") ? read("coeffIm") : Real(0));
}

template <class S>
nlohmann::json elementToJson(const Element<S>& x) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [m, c] : x.terms()) {
    nlohmann::json t = {{"aExp", m.aExp}, {"bExp", m.bExp}, {"bStarExp", m.bStarExp}};
    t.update(scalarToJson(c));
    arr.push_back(t);
  }
  return arr;
}

template <class S>
Element<S> elementFromJson(const nlohmann::json& arr, const ScalarContext<S>& ctx) {
  Element<S> x;
  for (const auto& t : arr) {
    Monomial m{t.at("aExp").get<int>(), t.at("bExp").get<int>(), t.at("bStarExp").get<int>()};
    if (m.bExp < 0 || m.bStarExp < 0) throw std::invalid_argument("negative b exponent in JSON");
    x.add(m, scalarFromJson(t, ctx));
  }
  return x;
}

template <class S>
nlohmann::json tensorToJson(const Tensor<S>& t) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [left, right] : t.leftLegs())
    arr.push_back({{"left", {{"aExp", left.aExp}, {"bExp", left.bExp}, {"bStarExp", left.bStarExp}}},
                   {"right", elementToJson(right)}});
  return arr;
}

}  // namespace qsphere
