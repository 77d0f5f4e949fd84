#include "catch_amalgamated.hpp"

#include "qsphere/actions.hpp"
#include "support.hpp"

using namespace qsphere;
using namespace qtest;
using X = ExactScalar;

namespace {

struct Fixture {
  Algebra<X> alg;
  UqActions<X> act;
  explicit Fixture(Rational q) : alg(ScalarContext<X>(q)), act(alg) {}
};

Fixture& half() {
  static Fixture f(Rational(1, 2));
  return f;
}

}  // namespace

TEST_CASE("actions on the unit and generators", "[actions]") {
  auto& [alg, act] = half();
  const auto& ctx = alg.scalars();
  CHECK(act.leftAction(UqGenerator::k, alg.one()) == alg.one());
  CHECK(act.leftAction(UqGenerator::e, alg.one()).isZero());
  CHECK(act.partialAction(UqGenerator::f, alg.one()).isZero());
  CHECK(act.partialAction(UqGenerator::k, alg.a()) == alg.a() * ctx.halfpow(1));
  CHECK(act.partialAction(UqGenerator::k, alg.multiply(alg.b(), alg.bs())) == alg.multiply(alg.b(), alg.bs()));
  CHECK(act.twistedDerivation(DerivationLabel::delta1, alg.one()).isZero());
  // right actions on generators
  CHECK(act.partialAction(UqGenerator::e, alg.a()) == alg.bs());
  CHECK(act.partialAction(UqGenerator::f, alg.bs()) == alg.a());
}

TEST_CASE("weights of the Cartan actions", "[actions]") {
  auto& [alg, act] = half();
  const auto& ctx = alg.scalars();
  for (const auto& m : allMonomials(4)) {
    auto x = alg.monomial(m);
    CHECK(act.leftAction(UqGenerator::k, x) == x * ctx.halfpow(m.leftDegree()));
    CHECK(act.partialAction(UqGenerator::k, x) == x * ctx.halfpow(m.rightDegree()));
    // (q^{L/2} - q^{-L/2}) / (q - q^{-1})
    X expected = (ctx.halfpow(m.leftDegree()) - ctx.halfpow(-m.leftDegree())) / (ctx.qpow(1) - ctx.qpow(-1));
    CHECK(act.twistedDerivation(DerivationLabel::delta3, x) == x * expected);
    CHECK(act.twistedDerivation(DerivationLabel::delta4, x) == x * (-expected));
  }
}

TEST_CASE("derivations respect the right grading", "[actions]") {
  auto& [alg, act] = half();
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = randomElement(alg, rng, 3);
    for (auto lab : {DerivationLabel::delta1, DerivationLabel::delta2, DerivationLabel::delta3,
                     DerivationLabel::deltaK}) {
      auto whole = act.twistedDerivation(lab, x);
      Element<X> sum;
      for (auto& [n, part] : alg.rightDegreeDecompose(x)) {
        auto image = act.twistedDerivation(lab, part);
        for (auto& [m, c] : image.terms()) CHECK(m.rightDegree() == n);
        sum += image;
      }
      CHECK(sum == whole);
    }
  }
}

TEST_CASE("twisted Leibniz, star compatibility and Haar annihilation", "[actions]") {
  auto& [alg, act] = half();
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    auto x = randomElement(alg, rng, 3), y = randomElement(alg, rng, 3);
    REQUIRE_FALSE(act.leibnizDefect(x, y).has_value());
    auto xs = alg.involution(x);
    CHECK(act.twistedDerivation(DerivationLabel::delta1, xs) ==
          -alg.involution(act.twistedDerivation(DerivationLabel::delta2, x)));
    CHECK(act.twistedDerivation(DerivationLabel::delta3, xs) ==
          -alg.involution(act.twistedDerivation(DerivationLabel::delta3, x)));
    for (auto lab : {DerivationLabel::delta1, DerivationLabel::delta2, DerivationLabel::delta3})
      CHECK(alg.haarState(act.twistedDerivation(lab, x)).isZero());
    CHECK(alg.haarState(act.leftAction(UqGenerator::k, x)) == alg.haarState(x));
  }
}

TEST_CASE("modular automorphism", "[actions]") {
  auto& [alg, act] = half();
  const auto& ctx = alg.scalars();
  CHECK(act.modularAutomorphism(alg.one(), false) == alg.one());
  for (const auto& m : allMonomials(3)) {
    auto x = alg.monomial(m);
    CHECK(act.modularAutomorphism(x, false) == x * ctx.qpow(-2 * m.aExp));
    CHECK(act.modularAutomorphism(x, true) == x * ctx.qpow(-m.aExp));
  }
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    auto x = randomElement(alg, rng, 3), y = randomElement(alg, rng, 3);
    auto nu = [&](const Element<X>& z) { return act.modularAutomorphism(z, false); };
    auto nuHalf = [&](const Element<X>& z) { return act.modularAutomorphism(z, true); };
    CHECK(alg.haarState(alg.multiply(x, y)) == alg.haarState(alg.multiply(nu(y), x)));
    CHECK(nuHalf(nuHalf(x)) == nu(x));
    CHECK(nu(alg.multiply(x, y)) == alg.multiply(nu(x), nu(y)));
    CHECK(act.modularInverseHalf(nuHalf(x)) == x);
    for (auto& [n, part] : alg.rightDegreeDecompose(x)) {
      auto image = nu(part);
      for (auto& [mm, c] : image.terms()) CHECK(mm.rightDegree() == n);
    }
  }
}

TEST_CASE("delta matrix and Dirac symbols", "[actions]") {
  auto& [alg, act] = half();
  for (const auto& e : act.deltaMatrix(alg.one())) CHECK(e.isZero());
  auto [p1, p2] = act.diracComponents(alg.one());
  CHECK(p1.isZero());
  CHECK(p2.isZero());
  CHECK_THROWS_AS(act.deltaMatrix(alg.a()), std::invalid_argument);

  for (const auto& e : act.deltaMatrix(alg.A()))
    for (auto& [m, c] : e.terms()) CHECK(m.rightDegree() == 0);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = selfAdjointPart(alg, randomElement(alg, rng, 4, 4, true));
    auto d = act.deltaMatrix(x);
    // [D, x] is skew for selfadjoint x: entrywise d_{ji}^* = -d_{ij}
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(alg.involution(d[2 * j + i]) == -d[2 * i + j]);
    auto [c1, c2] = act.diracComponents(x);
    for (auto& [m, c] : c1.terms()) CHECK(m.rightDegree() == -2);
    for (auto& [m, c] : c2.terms()) CHECK(m.rightDegree() == 2);
    auto y = randomElement(alg, rng, 4, 4, true);
    auto [y1, y2] = act.diracComponents(y);
    auto [s1, s2] = act.diracComponents(alg.involution(y));
    CHECK(s2 == -alg.involution(y1));
    CHECK(s1 == -alg.involution(y2));
  }
}

TEST_CASE("pairing table validation and round trip", "[actions]") {
  auto& [alg, act] = half();
  auto table = PairingTable::fromJson(PairingTable::standard().toJson());
  CHECK_NOTHROW(UqActions<X>(alg, table, 4));
  auto bad = PairingTable::standard();
  bad.e[0][1] = {2, 0};  // rescaled e breaks star compatibility
  CHECK_THROWS_AS(UqActions<X>(alg, bad, 3), PairingTableError);
  auto broken = PairingTable::standard();
  broken.k[0][0] = {1, 0};  // k no longer kills the relations
  CHECK_THROWS_AS(UqActions<X>(alg, broken), PairingTableError);
}

TEST_CASE("classical limit uses the primitive Cartan element", "[actions]") {
  Fixture f(Rational(1));
  auto& [alg, act] = f;
  for (const auto& m : allMonomials(3)) {
    auto x = alg.monomial(m);
    CHECK(act.twistedDerivation(DerivationLabel::delta3, x) == x * X(Rational(m.leftDegree(), 2)));
    CHECK(act.leftAction(UqGenerator::k, x) == x);
  }
  CHECK_FALSE(act.invariantFailure(3).has_value());
}

TEST_CASE("other deformation parameters and float mode", "[actions]") {
  Fixture f(Rational(9, 10));
  CHECK_FALSE(f.act.invariantFailure(3).has_value());
  Algebra<FloatScalar> alg(ScalarContext<FloatScalar>("0.7", 40));
  UqActions<FloatScalar> act(alg);
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = randomElement(alg, rng, 3), y = randomElement(alg, rng, 3);
    CHECK_FALSE(act.leibnizDefect(x, y).has_value());
  }
}
