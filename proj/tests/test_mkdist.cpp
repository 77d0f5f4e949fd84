#include "catch_amalgamated.hpp"

#include "qsphere/mkdist.hpp"
#include "support.hpp"

using namespace qsphere;
using namespace qtest;
using X = ExactScalar;

namespace {

struct Fixture {
  Algebra<X> alg;
  UqActions<X> act;
  Gns<X> gns;
  Berezin<X> ber;
  SpectralNorms<X> norms;
  DistanceEstimator<X> dist;
  explicit Fixture(Rational q)
      : alg(ScalarContext<X>(q)), act(alg), gns(act), ber(gns), norms(act), dist(ber, norms) {}
};

Fixture& half() {
  static Fixture f(Rational(1, 2));
  return f;
}

DistanceProblem small(int N, int M, DistanceMode mode) {
  DistanceProblem p;
  p.N = N;
  p.M = M;
  p.mode = mode;
  p.normTruncation = 60;
  p.maxIters = 150;
  p.restarts = 4;
  return p;
}

}  // namespace

TEST_CASE("selfadjoint probe basis", "[mkdist]") {
  auto& f = half();
  for (int M = 1; M <= 3; ++M) {
    auto basis = f.dist.selfadjointBasis(M);
    CHECK(basis.size() == static_cast<std::size_t>((M + 1) * (M + 1) - 1));
    for (const auto& g : basis) {
      CHECK(f.alg.involution(g) == g);
      CHECK(g.hasOnlyRightDegreeZero());
    }
  }
}

TEST_CASE("distance estimates dominate feasible points", "[mkdist]") {
  auto& f = half();
  auto& alg = f.alg;
  auto x0 = alg.A() - alg.one() * alg.counit(alg.A());
  for (auto mode : {DistanceMode::certified, DistanceMode::heuristic}) {
    auto p = small(2, 2, mode);
    auto est = f.dist.estimate(p);
    CHECK_FALSE(est.degraded);
    CHECK(est.witness == alg.involution(est.witness));
    CHECK(est.value >= f.dist.objectiveOf(x0, p) - 1e-9);
    CHECK(est.value == Catch::Approx(est.optimizerValue).epsilon(1e-6));
    for (double c : {-10.0, -1.0, 1.0, 10.0})
      CHECK(f.dist.objectiveOf(est.witness + alg.one() * X(Rational(c)), p) ==
            Catch::Approx(est.value).epsilon(1e-12));
    for (std::size_t k = 1; k < est.trace.size(); ++k) CHECK(est.trace[k] >= est.trace[k - 1]);
  }
  auto cert = f.dist.estimate(small(2, 2, DistanceMode::certified));
  auto heur = f.dist.estimate(small(2, 2, DistanceMode::heuristic));
  CHECK(cert.value <= heur.value + 1e-9);
}

TEST_CASE("estimator invariances", "[mkdist]") {
  auto& f = half();
  auto p = small(1, 2, DistanceMode::certified);
  auto base = f.dist.estimate(p);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.25, 4.0);
  p.basisScale.resize(f.dist.selfadjointBasis(2).size());
  for (auto& s : p.basisScale) s = u(rng);
  CHECK(f.dist.estimate(p).value == Catch::Approx(base.value).epsilon(1e-9));

  // nested search spaces with the previous witness as a start
  auto p2 = small(2, 2, DistanceMode::certified);
  auto e2 = f.dist.estimate(p2);
  auto p3 = small(2, 3, DistanceMode::certified);
  auto e3 = f.dist.estimate(p3, e2.witness);
  CHECK(e3.value >= e2.value - 1e-9);
}

TEST_CASE("distance lower bounds shrink with N", "[mkdist]") {
  auto& f = half();
  double prev = 1e300;
  for (int N = 1; N <= 4; ++N) {
    auto est = f.dist.estimate(small(N, 3, DistanceMode::certified));
    CHECK(est.value <= prev + 1e-3);
    prev = est.value;
  }
}

TEST_CASE("probes and the approximant", "[mkdist]") {
  auto& f = half();
  auto& alg = f.alg;
  CHECK_THROWS_AS(f.dist.probe(alg.one() * X(3), 2, 0.1, 60, 1e-3), std::invalid_argument);
  auto suite = f.dist.probeSuite();
  REQUIRE(suite.size() == 5);
  for (auto& [name, x] : suite) {
    CHECK(alg.counit(x).isZero());
    CHECK(alg.involution(x) == x);
    double prev = 1e300;
    for (int N = 1; N <= 4; ++N) {
      auto r = f.dist.probe(x, N, 1.0, 100, 1e-3);
      CHECK(std::isfinite(r.ratio));
      CHECK(r.ratio <= prev + 1e-12);
      prev = r.ratio;
    }
  }
  Element<X> y;
  auto unit = f.dist.approximant(alg.one(), 3, 60, &y);
  CHECK(y == alg.one());
  CHECK(unit.lipSlack == 0);
  CHECK(unit.distSlack == Catch::Approx(0).margin(1e-14));
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 5; ++trial) {
    auto x = selfAdjointPart(alg, randomElement(alg, rng, 4, 4, true));
    auto lo = f.dist.approximant(x, 2, 100);
    auto hi = f.dist.approximant(x, 6, 100);
    CHECK(lo.lipSlack >= -1e-6);
    CHECK(hi.distSlack <= lo.distSlack + 1e-12);
  }
}
