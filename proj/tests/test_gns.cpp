#include "catch_amalgamated.hpp"

#include "qsphere/gns.hpp"
#include "support.hpp"

using namespace qsphere;
using namespace qtest;
using X = ExactScalar;

namespace {

struct Fixture {
  Algebra<X> alg;
  UqActions<X> act;
  Gns<X> gns;
  explicit Fixture(Rational q) : alg(ScalarContext<X>(q)), act(alg), gns(act) {}
};

Fixture& half() {
  static Fixture f(Rational(1, 2));
  return f;
}

}  // namespace

TEST_CASE("Haar inner product", "[gns]") {
  auto& [alg, act, gns] = half();
  CHECK(gns.haarInner(alg.one(), alg.one()) == X(1));
  CHECK(gns.haarInner(alg.a(), alg.b()).isZero());
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = randomElement(alg, rng, 3), y = randomElement(alg, rng, 3);
    auto lam = randomCoefficient(alg, rng);
    CHECK(gns.haarInner(x, x).isReal());
    CHECK(gns.haarInner(x, x).realSign() > 0);
    CHECK(gns.haarInner(x, y * lam) == gns.haarInner(x, y) * lam);
    CHECK(gns.haarInner(y, x) == gns.haarInner(x, y).conj());
    CHECK(gns.haarInner(x, y) == alg.haarState(alg.multiply(alg.involution(x), y)));
  }
}

TEST_CASE("fuzzy basis shape", "[gns]") {
  auto& [alg, act, gns] = half();
  const auto& b0 = gns.basis(0);
  REQUIRE(b0.size() == 1);
  CHECK(b0.vectors[0].vector == alg.one());
  CHECK(b0.vectors[0].spin == 0);
  CHECK(b0.vectors[0].weight == 0);
  CHECK(gns.basis(2).size() == 9);
  const auto& b4 = gns.basis(4);
  CHECK(b4.size() == 25);
  CHECK(b4.gramCertificate.isZero());
  CHECK_NOTHROW(gns.validateBasis(b4));
  for (int n = 0; n <= 4; ++n) {
    std::set<int> weights;
    for (const auto& v : b4.vectors)
      if (v.spin == n) weights.insert(v.weight);
    CHECK(weights.size() == static_cast<std::size_t>(2 * n + 1));
  }
  // weight label is the exponent of the left Cartan action
  for (const auto& v : b4.vectors) {
    CHECK(v.vector.hasOnlyRightDegreeZero());
    CHECK(act.leftAction(UqGenerator::k, v.vector) == v.vector * alg.scalars().qpow(v.weight));
  }
}

TEST_CASE("projection onto the filtration", "[gns]") {
  auto& [alg, act, gns] = half();
  CHECK(gns.phiProjection(alg.one(), 0) == alg.one());
  CHECK(gns.phiProjection(alg.one(), 3) == alg.one());
  CHECK_THROWS_AS(gns.phiProjection(alg.a(), 2), std::invalid_argument);
  // sphere monomials of algebra degree <= 2N are fixed
  for (const auto& m : sphereMonomials(6)) {
    auto x = alg.monomial(m);
    CHECK(gns.phiProjection(x, 3) == x);
  }
  for (const auto& v : gns.basis(4).vectors)
    for (int N = 0; N < v.spin; ++N) CHECK(gns.phiProjection(v.vector, N).isZero());

  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = randomElement(alg, rng, 6, 4, true);
    for (int N = 0; N <= 3; ++N) {
      auto p = gns.phiProjection(x, N);
      CHECK(gns.phiProjection(p, N) == p);
      for (int M = 0; M <= 3; ++M) CHECK(gns.phiProjection(gns.phiProjection(x, M), N) == gns.phiProjection(x, std::min(N, M)));
      CHECK(gns.parsevalSum(x, N) == gns.haarInner(p, p));
      CHECK(gns.phiProjection(x, N, BasisOrdering::spherePowers) == p);
      // orthogonal residual
      CHECK(gns.haarInner(p, x - p).isZero());
    }
  }
}

TEST_CASE("adjoint pattern of the compressed derivations", "[gns]") {
  auto& [alg, act, gns] = half();
  const auto& ctx = alg.scalars();
  for (int M = 0; M <= 5; ++M) {
    auto d1 = gns.operatorMatrixOf(DerivationLabel::delta1, M);
    auto d2 = gns.operatorMatrixOf(DerivationLabel::delta2, M);
    auto d3 = gns.operatorMatrixOf(DerivationLabel::delta3, M);
    CHECK(gns.adjointDefect(d1, d2, ctx.qpow(-1)).isZero());
    CHECK(gns.adjointDefect(d3, d3, ctx.one()).isZero());
    for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d1.entries[i][0].isZero());
  }
}

TEST_CASE("derivations commute with the filtration projections", "[gns]") {
  auto& [alg, act, gns] = half();
  CHECK(gns.pnCommutationCheck(DerivationLabel::delta1, 1, 3).isZero());
  CHECK(gns.pnCommutationCheck(DerivationLabel::delta3, 0, 2).isZero());
  for (int N = 0; N <= 4; ++N) CHECK(gns.pnCommutationCheck(DerivationLabel::delta2, N, N).isZero());
  for (auto lab : {DerivationLabel::delta1, DerivationLabel::delta2, DerivationLabel::delta3, DerivationLabel::delta4})
    for (int N = 0; N < 5; ++N) CHECK(gns.pnCommutationCheck(lab, N, 5).isZero());
  CHECK_THROWS_AS(gns.pnCommutationCheck(DerivationLabel::delta1, 3, 2), std::invalid_argument);
}

TEST_CASE("modular conjugation and the commutant", "[gns]") {
  auto& [alg, act, gns] = half();
  CHECK(gns.modularConjugation(alg.one()) == alg.one());
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    auto x = randomElement(alg, rng, 3), y = randomElement(alg, rng, 3);
    auto lam = randomCoefficient(alg, rng);
    CHECK(gns.modularConjugation(gns.modularConjugation(x)) == x);
    CHECK(gns.haarInner(gns.modularConjugation(x), gns.modularConjugation(y)) == gns.haarInner(x, y).conj());
    CHECK(gns.modularConjugation(x * lam) == gns.modularConjugation(x) * lam.conj());
  }
  CHECK(gns.commutantCheck(alg.one(), alg.B(), 4).isZero());
  CHECK(gns.commutantCheck(alg.A(), alg.one(), 4).isZero());
  CHECK(gns.commutantCheck(alg.A(), alg.B(), 4).isZero());
  CHECK(gns.commutantCheck(alg.a(), alg.bs(), 4).isZero());
}

TEST_CASE("basis JSON round trip", "[gns]") {
  auto& [alg, act, gns] = half();
  const auto& b = gns.basis(3);
  auto j = basisToJson(b, alg.scalars().qString());
  auto back = basisFromJson(j, alg.scalars());
  CHECK(back.size() == b.size());
  Fixture other(Rational(1, 2));
  CHECK_NOTHROW(other.gns.adoptBasis(back));
  back.vectors[3].normSquared = back.vectors[3].normSquared * X(2);
  CHECK_THROWS(other.gns.validateBasis(back));
  CHECK_THROWS(basisFromJson(j, ScalarContext<X>(Rational(1, 3))));
}

TEST_CASE("classical and float bases", "[gns][float]") {
  Fixture one(Rational(1));
  CHECK(one.gns.basis(3).size() == 16);
  CHECK(one.gns.basis(3).gramCertificate.isZero());

  Algebra<FloatScalar> alg(ScalarContext<FloatScalar>("0.7", 40));
  UqActions<FloatScalar> act(alg);
  Gns<FloatScalar> gns(act);
  CHECK_NOTHROW(gns.validateBasis(gns.basis(3)));
  auto d1 = gns.operatorMatrixOf(DerivationLabel::delta1, 3);
  auto d2 = gns.operatorMatrixOf(DerivationLabel::delta2, 3);
  CHECK(gns.adjointDefect(d1, d2, alg.scalars().qpow(-1)).magnitude() < 1e-20);
}
