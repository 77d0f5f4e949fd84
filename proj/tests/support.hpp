#pragma once

// Shared fixtures for the test binaries: seeded random elements and a small
// dense realization of the weighted-shift representation used as an
// independent check on the rewriting rules.

#include "qsphere/algebra.hpp"

#include <Eigen/Dense>

#include <complex>
#include <random>
#include <vector>

namespace qtest {

using namespace qsphere;

inline std::vector<Monomial> allMonomials(int maxDegree) {
  std::vector<Monomial> out;
  for (int d = 0; d <= maxDegree; ++d)
    for (int k = -d; k <= d; ++k)
      for (int l = 0; l + std::abs(k) <= d; ++l) out.push_back({k, l, d - std::abs(k) - l});
  return out;
}

// sphere monomials (right degree 0) up to the given algebra degree
inline std::vector<Monomial> sphereMonomials(int maxDegree) {
  std::vector<Monomial> out;
  for (const auto& m : allMonomials(maxDegree))
    if (m.rightDegree() == 0) out.push_back(m);
  return out;
}

template <class S>
S randomCoefficient(const Algebra<S>& alg, std::mt19937_64& rng, bool complex = true) {
  std::uniform_int_distribution<int> num(-5, 5), den(1, 4);
  const auto& ctx = alg.scalars();
  S c = ctx.rational(Rational(num(rng), den(rng)));
  if (complex) c += ctx.imag() * ctx.rational(Rational(num(rng), den(rng)));
  return c;
}

template <class S>
Element<S> randomElement(const Algebra<S>& alg, std::mt19937_64& rng, int maxDegree, int maxTerms = 4,
                         bool sphereOnly = false) {
  auto pool = sphereOnly ? sphereMonomials(maxDegree) : allMonomials(maxDegree);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> count(1, maxTerms);
  Element<S> x;
  int n = count(rng);
  for (int i = 0; i < n; ++i) x.add(pool[pick(rng)], randomCoefficient(alg, rng));
  if (x.isZero()) x = alg.one();
  return x;
}

template <class S>
Element<S> selfAdjointPart(const Algebra<S>& alg, const Element<S>& x) {
  return (x + alg.involution(x)) * alg.scalars().rational(Rational(1, 2));
}

// Dense weighted shift model: a e_n = sqrt(1 - q^{2n+2}) e_{n+1}, b e_n = e^{i th} q^n e_n.
using CMat = Eigen::MatrixXcd;

struct ShiftModel {
  double q;
  double theta;
  int size;

  CMat gen(Generator g) const {
    CMat m = CMat::Zero(size, size);
    std::complex<double> ph = std::polar(1.0, theta);
    for (int n = 0; n < size; ++n) {
      switch (g) {
        case Generator::a:
          if (n + 1 < size) m(n + 1, n) = std::sqrt(1 - std::pow(q, 2 * n + 2));
          break;
        case Generator::as:
          if (n + 1 < size) m(n, n + 1) = std::sqrt(1 - std::pow(q, 2 * n + 2));
          break;
        case Generator::b: m(n, n) = ph * std::pow(q, n); break;
        case Generator::bs: m(n, n) = std::conj(ph) * std::pow(q, n); break;
      }
    }
    return m;
  }

  CMat monomial(const Monomial& mono) const {
    CMat r = CMat::Identity(size, size);
    CMat ga = gen(mono.aExp >= 0 ? Generator::a : Generator::as);
    for (int i = 0; i < std::abs(mono.aExp); ++i) r = r * ga;
    CMat gb = gen(Generator::b), gbs = gen(Generator::bs);
    for (int i = 0; i < mono.bExp; ++i) r = r * gb;
    for (int i = 0; i < mono.bStarExp; ++i) r = r * gbs;
    return r;
  }

  template <class S>
  CMat element(const Element<S>& x) const {
    CMat r = CMat::Zero(size, size);
    for (const auto& [m, c] : x.terms()) r += c.toComplex() * monomial(m);
    return r;
  }
};

// max entry difference on the leading block untouched by truncation
inline double interiorDefect(const CMat& x, const CMat& y, int interior) {
  return (x.topLeftCorner(interior, interior) - y.topLeftCorner(interior, interior)).cwiseAbs().maxCoeff();
}

}  // namespace qtest
