#pragma once

// L^2(h) layer: inner product, the spin/weight graded orthogonal basis of the
// sphere subalgebra, the projections onto its filtration, and compressed
// matrices of the derivations.

#include "qsphere/actions.hpp"
#include "qsphere/expression.hpp"

#include <Eigen/Dense>

#include <fstream>
#include <set>

namespace qsphere {

enum class BasisOrdering {
  normalMonomials,  // a^w b^j bs^{w+j} and as^|w| b^{|w|+j} bs^j
  spherePowers      // (1 - A)^j B^w and (1 - A)^j Bs^|w|, expanded through the product
};

inline std::string toString(BasisOrdering o) {
  return o == BasisOrdering::normalMonomials ? "normalMonomials" : "spherePowers";
}

struct SingularGramError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class S>
struct FuzzyVector {
  Element<S> vector;  // orthogonal, not normalized
  S normSquared;
  int spin = 0;
  int weight = 0;
};

template <class S>
struct FuzzyBasis {
  int level = 0;
  BasisOrdering ordering = BasisOrdering::normalMonomials;
  std::vector<FuzzyVector<S>> vectors;  // sorted by (spin, weight)
  S gramCertificate;                    // sum of |<v_i, v_j>|^2 over i != j

  std::size_t size() const { return vectors.size(); }
};

template <class S>
struct OperatorMatrix {
  std::vector<int> spin, weight;
  std::vector<S> normSquared;
  std::vector<std::vector<S>> entries;  // <v_i, D v_j>, unnormalized

  std::size_t size() const { return spin.size(); }

  Eigen::MatrixXcd normalized() const {
    auto n = static_cast<Eigen::Index>(size());
    Eigen::MatrixXcd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        m(i, j) = entries[i][j].toComplex() /
                  std::sqrt(normSquared[i].toComplex().real() * normSquared[j].toComplex().real());
    return m;
  }
};

template <class S>
class Gns {
 public:
  using Elem = Element<S>;

  explicit Gns(const UqActions<S>& actions)
      : actions_(actions), alg_(actions.algebra()), cache_(std::make_shared<Caches>()) {}

  const Algebra<S>& algebra() const { return alg_; }
  const UqActions<S>& actions() const { return actions_; }

  // h(x* y); only monomial pairs of equal bidegree can contribute
  S haarInner(const Elem& x, const Elem& y) const {
    S out = alg_.scalars().zero();
    for (const auto& [mx, cx] : x.terms()) {
      for (const auto& [my, cy] : y.terms()) {
        if (mx.leftDegree() != my.leftDegree() || mx.rightDegree() != my.rightDegree()) continue;
        out += cx.conj() * cy * monomialInner(mx, my);
      }
    }
    return out;
  }

  const FuzzyBasis<S>& basis(int N, BasisOrdering ordering = BasisOrdering::normalMonomials) const {
    if (N < 0) throw std::invalid_argument("basis level must be non-negative");
    {
      std::lock_guard lock(cache_->mu);
      auto it = cache_->bases.find({N, ordering});
      if (it != cache_->bases.end()) return *it->second;
    }
    auto b = std::make_unique<FuzzyBasis<S>>(buildFuzzyBasis(N, ordering));
    std::lock_guard lock(cache_->mu);
    auto [it, inserted] = cache_->bases.try_emplace({N, ordering}, std::move(b));
    return *it->second;
  }

  // highest level built or adopted so far, -1 if none
  int cachedLevel(BasisOrdering ordering = BasisOrdering::normalMonomials) const {
    std::lock_guard lock(cache_->mu);
    int best = -1;
    for (const auto& [key, b] : cache_->bases)
      if (key.second == ordering) best = std::max(best, key.first);
    return best;
  }

  // install a basis read from disk (after validation)
  void adoptBasis(FuzzyBasis<S> b) const {
    validateBasis(b);
    std::lock_guard lock(cache_->mu);
    cache_->bases[{b.level, b.ordering}] = std::make_unique<FuzzyBasis<S>>(std::move(b));
  }

  FuzzyBasis<S> buildFuzzyBasis(int N, BasisOrdering ordering) const {
    FuzzyBasis<S> out;
    out.level = N;
    out.ordering = ordering;
    out.gramCertificate = alg_.scalars().zero();
    for (int w = -N; w <= N; ++w) {
      std::vector<FuzzyVector<S>> sector;
      for (int j = 0; j + std::abs(w) <= N; ++j) {
        Elem g = generator(w, j, ordering);
        Elem v = g;
        for (const auto& prev : sector)
          v -= prev.vector * (haarInner(prev.vector, g) / prev.normSquared);
        S s = haarInner(v, v);
        if (s.realSign() <= 0)
          throw SingularGramError("Gram-Schmidt met a null vector at weight " + std::to_string(w) +
                                  ", spin " + std::to_string(std::abs(w) + j));
        sector.push_back({std::move(v), s, std::abs(w) + j, w});
      }
      for (std::size_t i = 0; i < sector.size(); ++i)
        for (std::size_t k = 0; k < sector.size(); ++k) {
          if (i == k) continue;
          S ip = haarInner(sector[i].vector, sector[k].vector);
          out.gramCertificate += ip * ip.conj();
        }
      for (auto& v : sector) out.vectors.push_back(std::move(v));
    }
    std::stable_sort(out.vectors.begin(), out.vectors.end(), [](const auto& x, const auto& y) {
      return std::tie(x.spin, x.weight) < std::tie(y.spin, y.weight);
    });
    return out;
  }

  // orthogonal projection onto the spin <= N part of the sphere subalgebra
  Elem phiProjection(const Elem& x, int N, BasisOrdering ordering = BasisOrdering::normalMonomials) const {
    if (!x.hasOnlyRightDegreeZero())
      throw std::invalid_argument("projection input is not in the sphere subalgebra");
    const auto& b = basis(std::max(N, 0), ordering);
    Elem out;
    for (const auto& v : b.vectors) {
      if (v.spin > N) continue;
      S c = haarInner(v.vector, x);
      if (!c.isZero()) out += v.vector * (c / v.normSquared);
    }
    return out;
  }

  // sum_i |<v_i, x>|^2 / |v_i|^2
  S parsevalSum(const Elem& x, int N) const {
    S out = alg_.scalars().zero();
    for (const auto& v : basis(N).vectors) {
      S c = haarInner(v.vector, x);
      out += c * c.conj() / v.normSquared;
    }
    return out;
  }

  OperatorMatrix<S> operatorMatrixOf(DerivationLabel label, int M) const {
    const auto& b = basis(M);
    OperatorMatrix<S> m;
    std::vector<Elem> images;
    for (const auto& v : b.vectors) {
      m.spin.push_back(v.spin);
      m.weight.push_back(v.weight);
      m.normSquared.push_back(v.normSquared);
      images.push_back(actions_.twistedDerivation(label, v.vector));
    }
    m.entries.assign(b.size(), std::vector<S>(b.size(), alg_.scalars().zero()));
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) m.entries[i][j] = haarInner(b.vectors[i].vector, images[j]);
    return m;
  }

  // squared Frobenius norm of P_N D - D P_N in normalized coordinates
  S pnCommutationCheck(DerivationLabel label, int N, int M) const {
    if (M < N) throw std::invalid_argument("compression level must be >= N");
    auto m = operatorMatrixOf(label, M);
    S out = alg_.scalars().zero();
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j)
        if ((m.spin[i] <= N) != (m.spin[j] <= N))
          out += m.entries[i][j] * m.entries[i][j].conj() / (m.normSquared[i] * m.normSquared[j]);
    return out;
  }

  // squared Frobenius norm of X - factor * Y^dagger in normalized coordinates
  S adjointDefect(const OperatorMatrix<S>& x, const OperatorMatrix<S>& y, const S& factor) const {
    S out = alg_.scalars().zero();
    for (std::size_t i = 0; i < x.size(); ++i)
      for (std::size_t j = 0; j < x.size(); ++j) {
        S d = x.entries[i][j] - factor * y.entries[j][i].conj();
        out += d * d.conj() / (x.normSquared[i] * x.normSquared[j]);
      }
    return out;
  }

  // J(y) = nu^{-1/2}(y*)
  Elem modularConjugation(const Elem& x) const {
    return actions_.modularInverseHalf(alg_.involution(x));
  }

  // [J x J, y] on monomial vectors xi whose images stay within degree M
  S commutantCheck(const Elem& x, const Elem& y, int M) const {
    int interior = M - (x.degree() + y.degree());
    S out = alg_.scalars().zero();
    if (interior < 0) return out;
    auto jxj = [&](const Elem& xi) { return modularConjugation(alg_.multiply(x, modularConjugation(xi))); };
    for (const auto& m : UqActions<S>::monomialsUpTo(interior)) {
      Elem xi = alg_.monomial(m);
      Elem r = jxj(alg_.multiply(y, xi)) - alg_.multiply(y, jxj(xi));
      out += haarInner(r, r);
    }
    return out;
  }

  void validateBasis(const FuzzyBasis<S>& b) const {
    std::set<std::pair<int, int>> labels;
    for (const auto& v : b.vectors) {
      if (!v.vector.hasOnlyRightDegreeZero()) throw std::invalid_argument("basis vector outside the sphere");
      if (!labels.insert({v.spin, v.weight}).second) throw std::invalid_argument("duplicate basis label");
      if (!(haarInner(v.vector, v.vector) == v.normSquared)) throw std::invalid_argument("basis norm mismatch");
    }
    if (b.vectors.size() != static_cast<std::size_t>((b.level + 1) * (b.level + 1)))
      throw std::invalid_argument("basis has the wrong cardinality");
    for (std::size_t i = 0; i < b.size(); ++i)
      for (std::size_t j = i + 1; j < b.size(); ++j)
        if (!haarInner(b.vectors[i].vector, b.vectors[j].vector).isZero())
          throw std::invalid_argument("basis vectors are not orthogonal");
  }

 private:
  struct Caches {
    std::mutex mu;
    std::map<std::pair<int, BasisOrdering>, std::unique_ptr<FuzzyBasis<S>>> bases;
    std::map<std::pair<Monomial, Monomial>, S> inner;
  };

  S monomialInner(const Monomial& mx, const Monomial& my) const {
    {
      std::lock_guard lock(cache_->mu);
      auto it = cache_->inner.find({mx, my});
      if (it != cache_->inner.end()) return it->second;
    }
    S v = alg_.haarState(alg_.multiply(alg_.involution(alg_.monomial(mx)), alg_.monomial(my)));
    std::lock_guard lock(cache_->mu);
    cache_->inner.emplace(std::make_pair(mx, my), v);
    return v;
  }

  Elem generator(int w, int j, BasisOrdering ordering) const {
    if (ordering == BasisOrdering::normalMonomials) {
      if (w >= 0) return alg_.monomial({w, j, w + j});
      return alg_.monomial({w, -w + j, j});
    }
    Elem g = alg_.power(alg_.one() - alg_.A(), j);
    return alg_.multiply(g, alg_.power(w >= 0 ? alg_.B() : alg_.Bs(), std::abs(w)));
  }

  const UqActions<S>& actions_;
  const Algebra<S>& alg_;
  std::shared_ptr<Caches> cache_;
};

// ---- JSON export / import of bases

template <class S>
nlohmann::json basisToJson(const FuzzyBasis<S>& b, const std::string& q) {
  nlohmann::json vs = nlohmann::json::array();
  for (const auto& v : b.vectors)
    vs.push_back({{"spin", v.spin},
                  {"weight", v.weight},
                  {"normSquared", scalarToJson(v.normSquared)},
                  {"element", elementToJson(v.vector)}});
  return {{"schema", "qsphere/1"}, {"kind", "fuzzyBasis"}, {"q", q},
          {"level", b.level},      {"ordering", toString(b.ordering)}, {"vectors", vs}};
}

template <class S>
FuzzyBasis<S> basisFromJson(const nlohmann::json& j, const ScalarContext<S>& ctx) {
  if (j.value("schema", "") != "qsphere/1") throw std::invalid_argument("unknown basis schema");
  if (j.at("q").get<std::string>() != ctx.qString())
    throw std::invalid_argument("basis cache was built for a different q");
  FuzzyBasis<S> b;
  b.level = j.at("level").get<int>();
  b.ordering = j.value("ordering", "normalMonomials") == "spherePowers" ? BasisOrdering::spherePowers
                                                                        : BasisOrdering::normalMonomials;
  b.gramCertificate = ctx.zero();
  for (const auto& v : j.at("vectors"))
    b.vectors.push_back({elementFromJson(v.at("element"), ctx), scalarFromJson(v.at("normSquared"), ctx),
                         v.at("spin").get<int>(), v.at("weight").get<int>()});
  return b;
}

}  // namespace qsphere
