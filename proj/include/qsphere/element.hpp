#pragma once

#include "qsphere/scalar.hpp"

#include <algorithm>
#include <compare>
#include <cstdlib>
#include <map>
#include <tuple>
#include <utility>

namespace qsphere {

// a^k b^l bs^m in normal order; negative aExp means powers of a*.
struct Monomial {
  int aExp = 0;
  int bExp = 0;
  int bStarExp = 0;

  int degree() const { return std::abs(aExp) + bExp + bStarExp; }
  int rightDegree() const { return aExp + bExp - bStarExp; }
  int leftDegree() const { return aExp - bExp + bStarExp; }
  bool isUnit() const { return aExp == 0 && bExp == 0 && bStarExp == 0; }

  auto operator<=>(const Monomial&) const = default;
};

template <class S>
class Element {
 public:
  using Terms = std::map<Monomial, S>;

  Element() = default;
  Element(const Monomial& m, const S& c) { add(m, c); }

  static Element constant(const S& c) { return Element(Monomial{}, c); }

  const Terms& terms() const { return terms_; }
  bool isZero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add(const Monomial& m, const S& c) {
    if (c.isZero()) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second.isZero()) terms_.erase(it);
    }
  }

  S coefficient(const Monomial& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? S() : it->second;
  }

  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) d = std::max(d, m.degree());
    return d;
  }

  bool hasOnlyRightDegreeZero() const {
    for (const auto& [m, c] : terms_)
      if (m.rightDegree() != 0) return false;
    return true;
  }

  Element& operator+=(const Element& o) {
    for (const auto& [m, c] : o.terms_) add(m, c);
    return *this;
  }
  Element& operator-=(const Element& o) {
    for (const auto& [m, c] : o.terms_) add(m, -c);
    return *this;
  }
  Element& operator*=(const S& s) {
    if (s.isZero()) {
      terms_.clear();
      return *this;
    }
    Terms out;
    for (auto& [m, c] : terms_) {
      S v = c * s;
      if (!v.isZero()) out.emplace(m, std::move(v));
    }
    terms_ = std::move(out);
    return *this;
  }
  Element operator-() const {
    Element r;
    for (const auto& [m, c] : terms_) r.terms_.emplace(m, -c);
    return r;
  }
  friend Element operator+(Element a, const Element& b) { return a += b; }
  friend Element operator-(Element a, const Element& b) { return a -= b; }
  friend Element operator*(Element a, const S& s) { return a *= s; }
  friend Element operator*(const S& s, Element a) { return a *= s; }

  // exact equality in exact mode; tolerance-based in float mode
  friend bool operator==(const Element& a, const Element& b) { return (a - b).isZero(); }

 private:
  Terms terms_;
};

// Sum of (left monomial) (x) (right monomial) with scalar weights.
template <class S>
class Tensor {
 public:
  using Key = std::pair<Monomial, Monomial>;
  using Terms = std::map<Key, S>;

  const Terms& terms() const { return terms_; }
  bool isZero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  void add(const Monomial& l, const Monomial& r, const S& c) {
    if (c.isZero()) return;
    auto [it, inserted] = terms_.try_emplace(Key{l, r}, c);
    if (!inserted) {
      it->second += c;
      if (it->second.isZero()) terms_.erase(it);
    }
  }
  void addProduct(const Element<S>& l, const Element<S>& r, const S& w) {
    for (const auto& [ml, cl] : l.terms())
      for (const auto& [mr, cr] : r.terms()) add(ml, mr, w * cl * cr);
  }

  // canonical grouping: distinct left monomials with merged right legs
  std::map<Monomial, Element<S>> leftLegs() const {
    std::map<Monomial, Element<S>> out;
    for (const auto& [k, c] : terms_) out[k.first].add(k.second, c);
    return out;
  }

  Tensor& operator+=(const Tensor& o) {
    for (const auto& [k, c] : o.terms_) add(k.first, k.second, c);
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    for (const auto& [k, c] : o.terms_) add(k.first, k.second, -c);
    return *this;
  }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend bool operator==(const Tensor& a, const Tensor& b) { return (a - b).isZero(); }

 private:
  Terms terms_;
};

// Elements of the triple tensor power, used for coassociativity.
template <class S>
class Tensor3 {
 public:
  using Key = std::tuple<Monomial, Monomial, Monomial>;
  void add(const Monomial& x, const Monomial& y, const Monomial& z, const S& c) {
    if (c.isZero()) return;
    auto [it, inserted] = terms_.try_emplace(Key{x, y, z}, c);
    if (!inserted) {
      it->second += c;
      if (it->second.isZero()) terms_.erase(it);
    }
  }
  const std::map<Key, S>& terms() const { return terms_; }
  friend bool operator==(const Tensor3& a, const Tensor3& b) {
    Tensor3 d = a;
    for (const auto& [k, c] : b.terms_) d.add(std::get<0>(k), std::get<1>(k), std::get<2>(k), -c);
    return d.terms_.empty();
  }

 private:
  std::map<Key, S> terms_;
};

}  // namespace qsphere
