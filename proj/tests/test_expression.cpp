#include "catch_amalgamated.hpp"

#include "qsphere/expression.hpp"
#include "support.hpp"

using namespace qsphere;
using namespace qtest;
using X = ExactScalar;

namespace {

Algebra<X>& alg() {
  static Algebra<X> a(ScalarContext<X>(Rational(1, 2)));
  return a;
}

}  // namespace

TEST_CASE("generators and sugar", "[expression]") {
  auto& g = alg();
  CHECK(parseExpression(g, "b*a") == g.monomial({1, 1, 0}) * X(Rational(1, 2)));
  CHECK(parseExpression(g, "A") == g.multiply(g.bs(), g.b()));
  CHECK(parseExpression(g, "B") == g.multiply(g.a(), g.bs()));
  CHECK(parseExpression(g, "Bs") == g.multiply(g.b(), g.as()));
  CHECK(parseExpression(g, "  a * as ") == g.one() - g.monomial({0, 1, 1}));
  CHECK(parseExpression(g, "A - 1/2") == g.A() - g.one() * X(Rational(1, 2)));
  CHECK(parseExpression(g, "(a+b)^2") == g.power(g.a() + g.b(), 2));
  CHECK(parseExpression(g, "a^0") == g.one());
  CHECK(parseExpression(g, "-b + 2*b") == g.b());
  CHECK(parseExpression(g, "0.25*A") == g.A() * X(Rational(1, 4)));
  CHECK(parseExpression(g, "i*i") == -g.one());
  CHECK(parseExpression(g, "sqrtq*sqrtq") == g.one() * X(Rational(1, 2)));
}

TEST_CASE("parse errors carry a position", "[expression]") {
  auto& g = alg();
  auto position = [&](const std::string& text) {
    try {
      parseExpression(g, text);
    } catch (const ParseError& e) {
      return std::make_pair(e.line, e.column);
    }
    return std::make_pair(-1, -1);
  };
  CHECK(position("a + ") .first == 1);
  CHECK(position("a + c") == std::make_pair(1, 5));
  CHECK(position("a\n  * )") == std::make_pair(2, 5));
  CHECK(position("a^-1").first == 1);
  CHECK(position("1/0").first == 1);
  CHECK(position("(a").first == 1);
  CHECK(position("").first == 1);
}

TEST_CASE("printing round trips on every monomial up to degree 5", "[expression]") {
  auto& g = alg();
  std::mt19937_64 rng(31);
  for (const auto& m : allMonomials(5)) {
    auto x = g.monomial(m) * randomCoefficient(g, rng);
    CHECK(parseExpression(g, toExpressionString(x)) == x);
    CHECK(parseExpression(g, monomialString(m)) == g.monomial(m));
  }
  auto c = g.scalars().sqrtq() * X(Rational(3, 7)) + g.scalars().imag();
  auto y = g.A() * c - g.one();
  CHECK(parseExpression(g, toExpressionString(y)) == y);
  CHECK(toExpressionString(Element<X>{}) == "0");
}

TEST_CASE("JSON form is canonical and reversible", "[expression]") {
  auto& g = alg();
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto x = randomElement(g, rng, 4, 6);
    auto j = elementToJson(x);
    CHECK(elementFromJson(j, g.scalars()) == x);
    CHECK(elementToJson(elementFromJson(j, g.scalars())).dump() == j.dump());
  }
  auto j = elementToJson(parseExpression(g, "b*a"));
  REQUIRE(j.size() == 1);
  CHECK(j[0]["aExp"] == 1);
  CHECK(j[0]["bExp"] == 1);
  CHECK(j[0]["bStarExp"] == 0);
  CHECK(j[0]["coeffNum"] == "1");
  CHECK(j[0]["coeffDen"] == "2");
}

TEST_CASE("float mode parses and serializes", "[expression][float]") {
  Algebra<FloatScalar> g(ScalarContext<FloatScalar>("0.7", 40));
  auto x = parseExpression(g, "b*a + 1/3");
  CHECK(x.coefficient({1, 1, 0}) == g.scalars().qpow(1));
  auto j = elementToJson(x);
  CHECK(j[0].contains("coeffRe"));
  CHECK(elementFromJson(j, g.scalars()) == x);
}
