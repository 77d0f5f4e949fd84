#include "catch_amalgamated.hpp"

#include "qsphere/specnorm.hpp"
#include "support.hpp"

using namespace qsphere;
using namespace qtest;
using X = ExactScalar;

namespace {

struct Fixture {
  Algebra<X> alg;
  UqActions<X> act;
  SpectralNorms<X> norms;
  explicit Fixture(Rational q, NormConfig cfg = {}) : alg(ScalarContext<X>(q)), act(alg), norms(act, cfg) {}
};

Fixture& half() {
  static Fixture f(Rational(1, 2));
  return f;
}

double denseNorm(const CSparse& m) {
  Eigen::MatrixXcd d(m);
  return Eigen::JacobiSVD<Eigen::MatrixXcd>(d).singularValues()(0);
}

}  // namespace

TEST_CASE("Lanczos matches a dense SVD", "[specnorm]") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int n : {10, 60, 150}) {
    for (int band : {0, 2, 5}) {
      std::vector<Eigen::Triplet<Complex>> t;
      for (int i = 0; i < n; ++i)
        for (int k = -band; k <= band; ++k)
          if (i + k >= 0 && i + k < n) t.emplace_back(i + k, i, Complex(g(rng), g(rng)));
      CSparse m(n, n);
      m.setFromTriplets(t.begin(), t.end());
      auto pair = dominantSingularPair(m);
      CHECK(pair.converged);
      CHECK(pair.sigma == Catch::Approx(denseNorm(m)).epsilon(1e-10));
      CHECK((m * pair.right - pair.sigma * pair.left).norm() < 1e-6 * pair.sigma);
    }
  }
  CSparse zero(30, 30);
  CHECK(dominantSingularPair(zero).sigma == 0);
}

TEST_CASE("a tight cluster at the top falls back to the dense solver", "[specnorm]") {
  const int n = 400;
  CSparse m(n, n);
  std::vector<Eigen::Triplet<Complex>> t;
  // top gap ~ 1e-5 of the spread, which restarted Lanczos resolves only slowly
  for (int i = 0; i < n; ++i) t.emplace_back(i, i, Complex(std::cos(std::numbers::pi * i / (2 * n)), 0));
  m.setFromTriplets(t.begin(), t.end());
  LanczosOptions restartOnly;
  restartOnly.denseFallback = 0;
  restartOnly.maxMatvecs = 600;
  CHECK_FALSE(dominantSingularPair(m, restartOnly).converged);
  auto pair = dominantSingularPair(m);
  CHECK(pair.converged);
  CHECK(pair.sigma == Catch::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("shift model realizes the relations", "[specnorm]") {
  auto& [alg, act, norms] = half();
  const int M = 40, interior = 30;
  auto dense = [&](const Element<X>& x) { return Eigen::MatrixXcd(norms.representElement(x, M, 0.3)); };
  auto prod = [&](const Element<X>& x, const Element<X>& y) { return Eigen::MatrixXcd(dense(x) * dense(y)); };
  auto block = [&](const Eigen::MatrixXcd& m) { return Eigen::MatrixXcd(m.topLeftCorner(interior, interior)); };
  double q = 0.5;
  Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(M, M);
  CHECK((block(prod(alg.as(), alg.a()) + q * q * prod(alg.b(), alg.bs()) - id)).norm() < 1e-13);
  CHECK((block(prod(alg.a(), alg.as()) + prod(alg.b(), alg.bs()) - id)).norm() < 1e-13);
  CHECK((block(prod(alg.b(), alg.a()) - q * prod(alg.a(), alg.b()))).norm() < 1e-13);
  CHECK((dense(alg.one()) - id).norm() == 0);
  Eigen::MatrixXcd A = dense(alg.A());
  for (int n = 0; n < M; ++n) CHECK(std::abs(A(n, n) - std::pow(q, 2 * n)) < 1e-15);
  CHECK((A - Eigen::MatrixXcd(A.diagonal().asDiagonal())).norm() == 0);

  // cross-check against the independent dense model in the shared fixtures
  ShiftModel model{q, 0.3, M};
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = randomElement(alg, rng, 4);
    CHECK(interiorDefect(dense(x), model.element(x), interior) < 1e-12);
    CHECK((dense(alg.involution(x)) - dense(x).adjoint()).norm() < 1e-12);
  }
}

TEST_CASE("operator norm estimates", "[specnorm]") {
  auto& [alg, act, norms] = half();
  auto one = norms.operatorNorm(alg.one());
  CHECK(one.lowerBound == Catch::Approx(1).epsilon(1e-12));
  CHECK(one.upperBound == 1);
  CHECK(one.converged);
  CHECK(norms.operatorNorm(alg.b()).lowerBound == Catch::Approx(1).epsilon(1e-12));
  CHECK(norms.operatorNorm(alg.A()).lowerBound == Catch::Approx(1).epsilon(1e-12));
  // ||a|| = 1 is only reached in the tail of the shift
  CHECK(norms.operatorNorm(alg.a()).lowerBound == Catch::Approx(1).epsilon(1e-12));

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = randomElement(alg, rng, 4, 4, true);
    auto est = norms.operatorNorm(x);
    CHECK(est.converged);
    CHECK(est.thetaGridSize == 1);
    CHECK(est.lowerBound <= est.upperBound);
    for (std::size_t k = 1; k < est.ladderValues.size(); ++k)
      CHECK(est.ladderValues[k] >= est.ladderValues[k - 1] * (1 - 1e-12));
    auto sq = norms.operatorNorm(alg.multiply(alg.involution(x), x));
    CHECK(sq.lowerBound == Catch::Approx(est.lowerBound * est.lowerBound).epsilon(1e-9));
    // gauge invariance in theta for zero-weight elements
    double v0 = denseNorm(norms.representElement(x, 60, 0.0));
    double v1 = denseNorm(norms.representElement(x, 60, 1.1));
    CHECK(v0 == Catch::Approx(v1).epsilon(1e-12));
  }
  auto mixed = norms.operatorNorm(alg.b() + alg.A(), 60, 8);
  CHECK(mixed.thetaGridSize == 8);
  CHECK(mixed.perTheta.size() == 8);
  // ||b + A|| = 2, attained at n = 0 with theta = 0
  CHECK(mixed.lowerBound == Catch::Approx(2).epsilon(1e-12));
}

TEST_CASE("Lip-norm and the Gram oracle", "[specnorm]") {
  auto& [alg, act, norms] = half();
  auto l1 = norms.lipNorm(alg.one());
  CHECK(l1.value.lowerBound == 0);
  CHECK(l1.value.upperBound == 0);
  CHECK(norms.lipNormGramOracle(alg.one()).lowerBound == 0);

  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    auto x = randomElement(alg, rng, 4, 4, true);
    auto lx = norms.lipNorm(x, 200);
    auto lxs = norms.lipNorm(alg.involution(x), 200);
    CHECK(lx.value.converged);
    CHECK(lx.value.lowerBound <= lx.value.upperBound);
    CHECK(lxs.value.lowerBound == Catch::Approx(lx.value.lowerBound).epsilon(1e-9));
    auto gram = norms.lipNormGramOracle(x, 200);
    CHECK(gram.converged);
    CHECK(gram.lowerBound == Catch::Approx(lx.value.lowerBound).epsilon(1e-9));
    // block monotonicity: the full matrix dominates each entry
    for (const auto& e : lx.components)
      CHECK(norms.operatorNorm(e, 200).lowerBound <= lx.value.lowerBound * (1 + 1e-12));
  }
  // nested compressions
  auto g1 = norms.lipNormGramOracle(alg.A() + alg.B(), 5);
  auto g2 = norms.lipNormGramOracle(alg.A() + alg.B(), 10);
  CHECK(g1.ladderValues.front() <= g2.ladderValues.front() + 1e-12);
}

TEST_CASE("classical evaluation model", "[specnorm]") {
  Fixture f(Rational(1));
  auto est = f.norms.operatorNorm(f.alg.A());
  CHECK(est.lowerBound == Catch::Approx(1).epsilon(1e-12));
  CHECK(est.converged);
  CHECK(f.norms.lipNorm(f.alg.one()).value.lowerBound == 0);
  auto lx = f.norms.lipNorm(f.alg.A() + f.alg.B());
  CHECK(lx.value.lowerBound > 0);
  CHECK(lx.value.lowerBound <= lx.value.upperBound);
  auto gram = f.norms.lipNormGramOracle(f.alg.A() + f.alg.B());
  CHECK(gram.lowerBound == Catch::Approx(lx.value.lowerBound).epsilon(1e-2));
}
