#pragma once

// Normal-ordered arithmetic in O(SU_q(2)) together with its Hopf structure and
// the Haar state.
//
// Relations used for rewriting (c = b bs = bs b):
//   b a = q a b,  bs a = q a bs,  b as = q^-1 as b,  bs as = q^-1 as bs
//   a as = 1 - c,  as a = 1 - q^2 c

#include "qsphere/element.hpp"

#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace qsphere {

enum class Generator { a, as, b, bs };

template <class S>
class Algebra {
 public:
  using Elem = Element<S>;
  using Tens = Tensor<S>;

  explicit Algebra(ScalarContext<S> ctx, int haarCap = 12)
      : ctx_(std::move(ctx)), cache_(std::make_shared<Caches>()), haarCap_(haarCap) {}

  const ScalarContext<S>& scalars() const { return ctx_; }
  bool qIsOne() const { return ctx_.qIsOne(); }

  // ---- construction helpers
  Elem one() const { return Elem::constant(ctx_.one()); }
  Elem constant(const S& s) const { return Elem::constant(s); }
  Elem monomial(const Monomial& m) const { return Elem(m, ctx_.one()); }
  Elem gen(Generator g) const {
    switch (g) {
      case Generator::a: return monomial({1, 0, 0});
      case Generator::as: return monomial({-1, 0, 0});
      case Generator::b: return monomial({0, 1, 0});
      case Generator::bs: return monomial({0, 0, 1});
    }
    return one();
  }
  Elem a() const { return gen(Generator::a); }
  Elem as() const { return gen(Generator::as); }
  Elem b() const { return gen(Generator::b); }
  Elem bs() const { return gen(Generator::bs); }
  // sphere generators
  Elem A() const { return multiply(bs(), b()); }
  Elem B() const { return multiply(a(), bs()); }
  Elem Bs() const { return multiply(b(), as()); }

  // ---- product
  Elem multiplyMonomials(const Monomial& x, const Monomial& y) const {
    Elem out;
    const auto& p = aProduct(x.aExp, y.aExp);
    S f = qpow(y.aExp * (x.bExp + x.bStarExp));
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (p[j].isZero()) continue;
      out.add({x.aExp + y.aExp, x.bExp + y.bExp + static_cast<int>(j),
               x.bStarExp + y.bStarExp + static_cast<int>(j)},
              f * p[j]);
    }
    return out;
  }

  Elem multiply(const Elem& x, const Elem& y) const {
    Elem out;
    for (const auto& [mx, cx] : x.terms())
      for (const auto& [my, cy] : y.terms()) {
        S w = cx * cy;
        Elem prod = multiplyMonomials(mx, my);
        for (const auto& [m, c] : prod.terms()) out.add(m, w * c);
      }
    return out;
  }

  Elem power(const Elem& x, int n) const {
    if (n < 0) throw std::invalid_argument("negative power");
    Elem r = one();
    for (int i = 0; i < n; ++i) r = multiply(r, x);
    return r;
  }

  // ---- involution: (a^k b^l bs^m)* = q^{-k(l+m)} a^{-k} b^m bs^l
  Elem involution(const Elem& x) const {
    Elem out;
    for (const auto& [m, c] : x.terms())
      out.add({-m.aExp, m.bStarExp, m.bExp}, c.conj() * qpow(-m.aExp * (m.bExp + m.bStarExp)));
    return out;
  }

  // ---- gradings
  std::map<int, Elem> rightDegreeDecompose(const Elem& x) const {
    std::map<int, Elem> out;
    for (const auto& [m, c] : x.terms()) out[m.rightDegree()].add(m, c);
    return out;
  }
  std::map<int, Elem> leftDegreeDecompose(const Elem& x) const {
    std::map<int, Elem> out;
    for (const auto& [m, c] : x.terms()) out[m.leftDegree()].add(m, c);
    return out;
  }

  // ---- coproduct
  Tens multiply(const Tens& x, const Tens& y) const {
    Tens out;
    for (const auto& [kx, cx] : x.terms())
      for (const auto& [ky, cy] : y.terms()) {
        S w = cx * cy;
        Elem l = multiplyMonomials(kx.first, ky.first);
        Elem r = multiplyMonomials(kx.second, ky.second);
        out.addProduct(l, r, w);
      }
    return out;
  }

  const Tens& coproductMonomial(const Monomial& m) const {
    {
      std::lock_guard lock(cache_->mu);
      auto it = cache_->coproduct.find(m);
      if (it != cache_->coproduct.end()) return *it->second;
    }
    Tens result;
    if (m.isUnit()) {
      result.add({}, {}, ctx_.one());
    } else {
      // peel the last letter of the normal-ordered word
      Monomial prefix = m;
      Generator last;
      if (m.bStarExp > 0) {
        --prefix.bStarExp;
        last = Generator::bs;
      } else if (m.bExp > 0) {
        --prefix.bExp;
        last = Generator::b;
      } else if (m.aExp > 0) {
        --prefix.aExp;
        last = Generator::a;
      } else {
        ++prefix.aExp;
        last = Generator::as;
      }
      result = multiply(coproductMonomial(prefix), generatorCoproduct(last));
    }
    std::lock_guard lock(cache_->mu);
    auto [it, inserted] = cache_->coproduct.try_emplace(m, std::make_unique<Tens>(std::move(result)));
    return *it->second;
  }

  Tens coproduct(const Elem& x) const {
    Tens out;
    for (const auto& [m, c] : x.terms())
      for (const auto& [k, w] : coproductMonomial(m).terms()) out.add(k.first, k.second, c * w);
    return out;
  }

  // ---- counit and antipode
  S counit(const Elem& x) const {
    S out = ctx_.zero();
    for (const auto& [m, c] : x.terms())
      if (m.bExp == 0 && m.bStarExp == 0) out += c;
    return out;
  }

  Elem antipodeMonomial(const Monomial& m) const {
    // S(a)=as, S(as)=a, S(b)=-q^-1 b, S(bs)=-q bs; antimultiplicative
    Elem r = monomial({0, 0, m.bStarExp});
    S f = ctx_.one();
    for (int i = 0; i < m.bStarExp; ++i) f = -f * qpow(1);
    for (int i = 0; i < m.bExp; ++i) f = -f * qpow(-1);
    r = multiply(r, monomial({0, m.bExp, 0}));
    r = multiply(r, monomial({-m.aExp, 0, 0}));
    return r * f;
  }
  Elem antipode(const Elem& x) const {
    Elem out;
    for (const auto& [m, c] : x.terms()) out += antipodeMonomial(m) * c;
    return out;
  }

  // ---- Haar state
  S haarMonomial(const Monomial& m) const {
    if (m.aExp != 0 || m.bExp != m.bStarExp) return ctx_.zero();
    return haarMoment(m.bExp);
  }
  S haarState(const Elem& x) const {
    S out = ctx_.zero();
    for (const auto& [m, c] : x.terms())
      if (m.aExp == 0 && m.bExp == m.bStarExp) out += c * haarMoment(m.bExp);
    return out;
  }
  // h(c^n), solved from the two invariance systems
  S haarMoment(int n) const {
    {
      std::lock_guard lock(cache_->mu);
      if (n < static_cast<int>(cache_->haar.size())) return cache_->haar[n];
    }
    int cap = std::max(n, std::max(haarCap_, 2 * static_cast<int>(cachedHaarSize())));
    std::vector<S> moments;
    if constexpr (isExact<S>) {
      moments = solveHaarMoments(cap);
    } else {
      // the moments are rational in q, and the elimination mixes coefficients down to
      // q^(cap^2), far below any absolute float tolerance; solve exactly and round once
      Algebra<ExactScalar> exact(ScalarContext<ExactScalar>(ctx_.qRational()), cap);
      for (int k = 0; k <= cap; ++k) {
        auto v = exact.haarMoment(k);
        moments.push_back(ctx_.rational(v.re()));
      }
    }
    std::lock_guard lock(cache_->mu);
    if (moments.size() > cache_->haar.size()) cache_->haar = std::move(moments);
    return cache_->haar[n];
  }

  // (f (x) id) and (id (x) f) for a functional given on monomials
  template <class F>
  Elem sliceLeft(const Tens& t, F&& f) const {
    Elem out;
    for (const auto& [k, c] : t.terms()) {
      S v = f(k.first);
      if (!v.isZero()) out.add(k.second, c * v);
    }
    return out;
  }
  template <class F>
  Elem sliceRight(const Tens& t, F&& f) const {
    Elem out;
    for (const auto& [k, c] : t.terms()) {
      S v = f(k.second);
      if (!v.isZero()) out.add(k.first, c * v);
    }
    return out;
  }

  // q^k with a small cache
  S qpow(int k) const {
    if (k == 0) return ctx_.one();
    std::lock_guard lock(cache_->mu);
    auto it = cache_->qpowers.find(k);
    if (it != cache_->qpowers.end()) return it->second;
    S v = ctx_.qpow(k);
    cache_->qpowers.emplace(k, v);
    return v;
  }

 private:
  struct Caches {
    std::mutex mu;
    std::map<std::pair<int, int>, std::unique_ptr<std::vector<S>>> aProducts;
    std::map<Monomial, std::unique_ptr<Tens>> coproduct;
    std::map<int, S> qpowers;
    std::vector<S> haar;
  };

  std::size_t cachedHaarSize() const {
    std::lock_guard lock(cache_->mu);
    return cache_->haar.size();
  }

  Tens generatorCoproduct(Generator g) const {
    Tens t;
    S mq = -qpow(1);
    switch (g) {
      case Generator::a:
        t.add({1, 0, 0}, {1, 0, 0}, ctx_.one());
        t.add({0, 0, 1}, {0, 1, 0}, mq);
        break;
      case Generator::as:
        t.add({-1, 0, 0}, {-1, 0, 0}, ctx_.one());
        t.add({0, 1, 0}, {0, 0, 1}, mq);
        break;
      case Generator::b:
        t.add({0, 1, 0}, {1, 0, 0}, ctx_.one());
        t.add({-1, 0, 0}, {0, 1, 0}, ctx_.one());
        break;
      case Generator::bs:
        t.add({0, 0, 1}, {-1, 0, 0}, ctx_.one());
        t.add({1, 0, 0}, {0, 0, 1}, ctx_.one());
        break;
    }
    return t;
  }

  // a^{k1} a^{k2} (signed exponents) = sum_j p[j] a^{k1+k2} c^j
  const std::vector<S>& aProduct(int k1, int k2) const {
    {
      std::lock_guard lock(cache_->mu);
      auto it = cache_->aProducts.find({k1, k2});
      if (it != cache_->aProducts.end()) return *it->second;
    }
    std::vector<S> p;
    if (k1 == 0 || k2 == 0 || (k1 > 0) == (k2 > 0)) {
      p = {ctx_.one()};
    } else if (k1 > 0) {
      int n = -k2;
      const auto& base = aProduct(k1 - 1, -(n - 1));
      p = base;
      p.push_back(ctx_.zero());
      S f = qpow(-2 * (n - 1));
      for (std::size_t j = 0; j < base.size(); ++j) p[j + 1] -= f * base[j];
    } else {
      const auto& base = aProduct(k1 + 1, k2 - 1);
      p = base;
      p.push_back(ctx_.zero());
      S f = qpow(2 * k2);
      for (std::size_t j = 0; j < base.size(); ++j) p[j + 1] -= f * base[j];
    }
    std::lock_guard lock(cache_->mu);
    auto [it, inserted] =
        cache_->aProducts.try_emplace({k1, k2}, std::make_unique<std::vector<S>>(std::move(p)));
    return *it->second;
  }

  std::vector<S> solveHaarMoments(int cap) const {
    // unknowns h_1..h_cap; column 0 carries the known h_0 = 1
    std::vector<std::vector<S>> rows;
    auto addSystem = [&](int n, bool leftSlice) {
      std::map<Monomial, std::vector<S>> eqs;
      const Tens& t = coproductMonomial({0, n, n});
      for (const auto& [k, c] : t.terms()) {
        const Monomial& integrated = leftSlice ? k.first : k.second;
        const Monomial& kept = leftSlice ? k.second : k.first;
        if (integrated.aExp != 0 || integrated.bExp != integrated.bStarExp) continue;
        auto& row = eqs[kept];
        if (row.empty()) row.assign(cap + 1, ctx_.zero());
        row[integrated.bExp] += c;
      }
      auto& unitRow = eqs[Monomial{}];
      if (unitRow.empty()) unitRow.assign(cap + 1, ctx_.zero());
      unitRow[n] -= ctx_.one();
      for (auto& [m, r] : eqs) rows.push_back(std::move(r));
    };
    for (int n = 1; n <= cap; ++n) {
      addSystem(n, true);
      addSystem(n, false);
    }
    // Gaussian elimination on columns 1..cap
    std::size_t rank = 0;
    std::vector<int> pivotRow(cap + 1, -1);
    for (int col = 1; col <= cap; ++col) {
      std::size_t best = rows.size();
      double bestMag = 0;
      for (std::size_t r = rank; r < rows.size(); ++r) {
        if (rows[r][col].isZero()) continue;
        double mag = rows[r][col].magnitude();
        if (best == rows.size() || mag > bestMag) {
          best = r;
          bestMag = mag;
          if constexpr (isExact<S>) break;
        }
      }
      if (best == rows.size()) throw std::runtime_error("Haar invariance system is singular");
      std::swap(rows[rank], rows[best]);
      S inv = S(1) / rows[rank][col];
      for (auto& v : rows[rank]) v = v * inv;
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r == rank || rows[r][col].isZero()) continue;
        S f = rows[r][col];
        for (int c2 = 0; c2 <= cap; ++c2)
          if (!rows[rank][c2].isZero()) rows[r][c2] -= f * rows[rank][c2];
      }
      pivotRow[col] = static_cast<int>(rank);
      ++rank;
    }
    // elimination on the high moments eats roughly half the working digits
    double scale = 1;
    for (const auto& row : rows)
      for (const auto& v : row) scale = std::max(scale, v.magnitude());
    for (std::size_t r = rank; r < rows.size(); ++r)
      for (auto& v : rows[r])
        if (!negligible(v, scale, 0.25)) throw std::runtime_error("Haar invariance system is inconsistent");
    std::vector<S> h(cap + 1, ctx_.zero());
    h[0] = ctx_.one();
    for (int col = 1; col <= cap; ++col) h[col] = -rows[pivotRow[col]][0];
    return h;
  }

  ScalarContext<S> ctx_;
  std::shared_ptr<Caches> cache_;
  int haarCap_;
};

}  // namespace qsphere
