#pragma once

// Left and right actions of U_q(su(2)) on O(SU_q(2)) through the dual pairing.
//
//   deltaEta(x)   = (<eta, .> (x) id) Delta(x)
//   partialEta(x) = (id (x) <eta, .>) Delta(x)
//
// The pairing is fixed by its values on u = [[as, -q b], [bs, a]] and extended to
// words via Delta(k) = k (x) k, Delta(e) = e (x) k + k^-1 (x) e (same for f).
// At q = 1 the Cartan part is the primitive h instead.

#include "qsphere/algebra.hpp"

#include <json.hpp>

#include <array>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace qsphere {

enum class UqGenerator { e, f, k, kinv, h };

enum class DerivationLabel {
  delta1,
  delta2,
  delta3,
  delta4,
  deltaK,
  deltaKinv,
  partialE,
  partialF,
  partialK
};

inline std::string toString(DerivationLabel l) {
  switch (l) {
    case DerivationLabel::delta1: return "delta1";
    case DerivationLabel::delta2: return "delta2";
    case DerivationLabel::delta3: return "delta3";
    case DerivationLabel::delta4: return "delta4";
    case DerivationLabel::deltaK: return "deltaK";
    case DerivationLabel::deltaKinv: return "deltaKinv";
    case DerivationLabel::partialE: return "partialE";
    case DerivationLabel::partialF: return "partialF";
    case DerivationLabel::partialK: return "partialK";
  }
  return "?";
}

inline DerivationLabel parseDerivationLabel(const std::string& s) {
  for (auto l : {DerivationLabel::delta1, DerivationLabel::delta2, DerivationLabel::delta3,
                 DerivationLabel::delta4, DerivationLabel::deltaK, DerivationLabel::deltaKinv,
                 DerivationLabel::partialE, DerivationLabel::partialF, DerivationLabel::partialK})
    if (toString(l) == s) return l;
  throw std::invalid_argument("unknown derivation label: " + s);
}

inline UqGenerator parseUqGenerator(const std::string& s) {
  if (s == "e") return UqGenerator::e;
  if (s == "f") return UqGenerator::f;
  if (s == "k") return UqGenerator::k;
  if (s == "kinv" || s == "k^-1") return UqGenerator::kinv;
  if (s == "h") return UqGenerator::h;
  throw std::invalid_argument("unknown U_q generator: " + s);
}

struct PairingTableError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// coeff * q^{halfPower/2}
struct PairingEntry {
  Rational coeff = 0;
  int halfPower = 0;
};

using PairingMatrix = std::array<std::array<PairingEntry, 2>, 2>;

struct PairingTable {
  PairingMatrix e, f, k, kinv, h;

  static PairingTable standard() {
    PairingTable t;
    t.k[0][0] = {1, -1};
    t.k[1][1] = {1, 1};
    t.kinv[0][0] = {1, 1};
    t.kinv[1][1] = {1, -1};
    t.e[0][1] = {1, 0};
    t.f[1][0] = {1, 0};
    t.h[0][0] = {-1, 0};
    t.h[1][1] = {1, 0};
    return t;
  }

  const PairingMatrix& matrix(UqGenerator g) const {
    switch (g) {
      case UqGenerator::e: return e;
      case UqGenerator::f: return f;
      case UqGenerator::k: return k;
      case UqGenerator::kinv: return kinv;
      case UqGenerator::h: return h;
    }
    return e;
  }

  nlohmann::json toJson() const {
    auto mat = [](const PairingMatrix& m) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : m) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& entry : r)
          row.push_back({{"coeff", entry.coeff.get_str()}, {"qHalfPower", entry.halfPower}});
        rows.push_back(row);
      }
      return rows;
    };
    return {{"schema", "qsphere/1"}, {"e", mat(e)},       {"f", mat(f)},
            {"k", mat(k)},           {"kinv", mat(kinv)}, {"h", mat(h)}};
  }

  static PairingTable fromJson(const nlohmann::json& j) {
    auto readMat = [&](const char* key, PairingMatrix& out, bool required) {
      if (!j.contains(key)) {
        if (required) throw PairingTableError(std::string("pairing table lacks ") + key);
        return;
      }
      const auto& rows = j.at(key);
      if (!rows.is_array() || rows.size() != 2)
        throw PairingTableError(std::string("pairing matrix ") + key + " must be 2x2");
      for (int r = 0; r < 2; ++r) {
        if (!rows[r].is_array() || rows[r].size() != 2)
          throw PairingTableError(std::string("pairing matrix ") + key + " must be 2x2");
        for (int c = 0; c < 2; ++c) {
          const auto& v = rows[r][c];
          PairingEntry entry;
          if (v.is_string()) {
            entry.coeff = parseRational(v.get<std::string>());
          } else if (v.is_number_integer()) {
            entry.coeff = Rational(v.get<long>());
          } else if (v.is_object()) {
            entry.coeff = parseRational(v.at("coeff").get<std::string>());
            entry.halfPower = v.value("qHalfPower", 0);
          } else {
            throw PairingTableError("unreadable pairing entry");
          }
          out[r][c] = entry;
        }
      }
    };
    PairingTable t = standard();
    readMat("e", t.e, true);
    readMat("f", t.f, true);
    readMat("k", t.k, true);
    readMat("kinv", t.kinv, true);
    readMat("h", t.h, false);
    return t;
  }

  static PairingTable load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PairingTableError("cannot open pairing table " + path);
    return fromJson(nlohmann::json::parse(in));
  }
};

template <class S>
class UqActions {
 public:
  using Elem = Element<S>;

  // The built-in table gets the cheap relation check; a table read from disk
  // should be constructed with fullValidationDegree = 4.
  UqActions(const Algebra<S>& alg, PairingTable table = PairingTable::standard(),
            int fullValidationDegree = 0)
      : alg_(alg), table_(std::move(table)), cache_(std::make_shared<Caches>()) {
    for (auto g : {UqGenerator::e, UqGenerator::f, UqGenerator::k, UqGenerator::kinv,
                   UqGenerator::h})
      for (auto x : {Generator::a, Generator::as, Generator::b, Generator::bs})
        genValue_[idx(g)][static_cast<int>(x)] = letterValue(g, x);
    checkRelations();
    if (fullValidationDegree > 0) {
      auto failure = invariantFailure(fullValidationDegree);
      if (failure) throw PairingTableError("pairing table rejected: " + *failure);
    }
  }

  const Algebra<S>& algebra() const { return alg_; }
  const PairingTable& table() const { return table_; }

  // <eta, m> for a normal-ordered monomial
  S pairing(UqGenerator g, const Monomial& m) const {
    auto key = std::make_pair(idx(g), m);
    {
      std::lock_guard lock(cache_->mu);
      auto it = cache_->pairing.find(key);
      if (it != cache_->pairing.end()) return it->second;
    }
    S v = pairWord(g, wordOf(m));
    std::lock_guard lock(cache_->mu);
    cache_->pairing.emplace(key, v);
    return v;
  }

  Elem leftAction(UqGenerator g, const Elem& x) const {
    Elem out;
    for (const auto& [m, c] : x.terms())
      out += alg_.sliceLeft(alg_.coproductMonomial(m), [&](const Monomial& l) { return pairing(g, l); }) * c;
    return out;
  }
  Elem partialAction(UqGenerator g, const Elem& x) const {
    Elem out;
    for (const auto& [m, c] : x.terms())
      out += alg_.sliceRight(alg_.coproductMonomial(m), [&](const Monomial& r) { return pairing(g, r); }) * c;
    return out;
  }

  Elem twistedDerivation(DerivationLabel label, const Elem& x) const {
    const auto& ctx = alg_.scalars();
    switch (label) {
      case DerivationLabel::delta1: return leftAction(UqGenerator::e, x) * ctx.halfpow(1);
      case DerivationLabel::delta2: return leftAction(UqGenerator::f, x) * ctx.halfpow(-1);
      case DerivationLabel::delta3: return delta3(x);
      case DerivationLabel::delta4: return -delta3(x);
      case DerivationLabel::deltaK: return leftAction(UqGenerator::k, x);
      case DerivationLabel::deltaKinv: return leftAction(UqGenerator::kinv, x);
      case DerivationLabel::partialE: return partialAction(UqGenerator::e, x);
      case DerivationLabel::partialF: return partialAction(UqGenerator::f, x);
      case DerivationLabel::partialK: return partialAction(UqGenerator::k, x);
    }
    return {};
  }

  // [[-d3, d2], [d1, d3]] row-major
  std::array<Elem, 4> deltaMatrix(const Elem& x) const {
    requireSphere(x);
    Elem d3 = delta3(x);
    return {-d3, twistedDerivation(DerivationLabel::delta2, x),
            twistedDerivation(DerivationLabel::delta1, x), d3};
  }

  // symbols of the two off-diagonal pieces of [D, x]
  std::pair<Elem, Elem> diracComponents(const Elem& x) const {
    requireSphere(x);
    const auto& ctx = alg_.scalars();
    return {partialAction(UqGenerator::e, x) * ctx.halfpow(1),
            partialAction(UqGenerator::f, x) * ctx.halfpow(-1)};
  }

  // nu = d_{k^-2} o p_{k^-2};  nu^{1/2} = p_k^{-1} o d_k^{-1}
  Elem modularAutomorphism(const Elem& x, bool half) const {
    Elem y = partialAction(UqGenerator::kinv, x);
    if (!half) y = partialAction(UqGenerator::kinv, y);
    y = leftAction(UqGenerator::kinv, y);
    if (!half) y = leftAction(UqGenerator::kinv, y);
    return y;
  }
  Elem modularInverseHalf(const Elem& x) const {
    return leftAction(UqGenerator::k, partialAction(UqGenerator::k, x));
  }

  // Leibniz, star, Haar and weight identities on all monomials up to the degree.
  std::optional<std::string> invariantFailure(int degree) const {
    const auto& ctx = alg_.scalars();
    auto monos = monomialsUpTo(degree);
    auto el = [&](const Monomial& m) { return alg_.monomial(m); };
    for (const auto& m : monos) {
      Elem x = el(m);
      for (auto lab : {DerivationLabel::delta1, DerivationLabel::delta2, DerivationLabel::delta3})
        if (!alg_.haarState(twistedDerivation(lab, x)).isZero())
          return "Haar annihilation fails for " + toString(lab);
      if (!(alg_.haarState(leftAction(UqGenerator::k, x)) == alg_.haarState(x)))
        return "h o delta_k != h";
      Elem xs = alg_.involution(x);
      if (!(twistedDerivation(DerivationLabel::delta1, xs) ==
            -alg_.involution(twistedDerivation(DerivationLabel::delta2, x))))
        return "delta1(x*) != -delta2(x)*";
      if (!(twistedDerivation(DerivationLabel::delta3, xs) ==
            -alg_.involution(twistedDerivation(DerivationLabel::delta3, x))))
        return "delta3(x*) != -delta3(x)*";
      if (!ctx.qIsOne() &&
          !(partialAction(UqGenerator::k, x) == x * ctx.halfpow(m.rightDegree())))
        return "partial_k weight mismatch";
    }
    for (const auto& m1 : monos)
      for (const auto& m2 : monos) {
        if (m1.degree() + m2.degree() > degree) continue;
        auto f = leibnizDefect(el(m1), el(m2));
        if (f) return *f;
      }
    return std::nullopt;
  }

  std::optional<std::string> leibnizDefect(const Elem& x, const Elem& y) const {
    Elem xy = alg_.multiply(x, y);
    Elem kx = leftAction(UqGenerator::k, x), ky = leftAction(UqGenerator::k, y);
    Elem kix = leftAction(UqGenerator::kinv, x);
    for (auto lab : {DerivationLabel::delta1, DerivationLabel::delta2, DerivationLabel::delta3}) {
      Elem lhs = twistedDerivation(lab, xy);
      Elem rhs = alg_.multiply(twistedDerivation(lab, x), ky) +
                 alg_.multiply(kix, twistedDerivation(lab, y));
      if (!(lhs == rhs)) return "twisted Leibniz fails for " + toString(lab);
    }
    if (!(leftAction(UqGenerator::k, xy) == alg_.multiply(kx, ky))) return "delta_k not multiplicative";
    return std::nullopt;
  }

  static std::vector<Monomial> monomialsUpTo(int degree) {
    std::vector<Monomial> out;
    for (int d = 0; d <= degree; ++d)
      for (int k = -d; k <= d; ++k)
        for (int l = 0; l + std::abs(k) <= d; ++l) {
          int m = d - std::abs(k) - l;
          out.push_back({k, l, m});
        }
    return out;
  }

 private:
  struct Caches {
    std::mutex mu;
    std::map<std::pair<int, Monomial>, S> pairing;
  };

  static int idx(UqGenerator g) { return static_cast<int>(g); }

  void requireSphere(const Elem& x) const {
    if (!x.hasOnlyRightDegreeZero())
      throw std::invalid_argument("element is not in the sphere subalgebra (nonzero right degree)");
  }

  Elem delta3(const Elem& x) const {
    const auto& ctx = alg_.scalars();
    if (ctx.qIsOne()) return leftAction(UqGenerator::h, x) * ctx.rational(Rational(1, 2));
    S denom = ctx.qpow(1) - ctx.qpow(-1);
    return (leftAction(UqGenerator::k, x) - leftAction(UqGenerator::kinv, x)) * (ctx.one() / denom);
  }

  S entry(const PairingEntry& e) const {
    return alg_.scalars().rational(e.coeff) * alg_.scalars().halfpow(e.halfPower);
  }

  // value of <g, letter> from the matrix against u = [[as, -q b], [bs, a]]
  S letterValue(UqGenerator g, Generator x) const {
    const auto& m = table_.matrix(g);
    switch (x) {
      case Generator::as: return entry(m[0][0]);
      case Generator::b: return -entry(m[0][1]) * alg_.scalars().qpow(-1);
      case Generator::bs: return entry(m[1][0]);
      case Generator::a: return entry(m[1][1]);
    }
    return {};
  }

  static std::vector<Generator> wordOf(const Monomial& m) {
    std::vector<Generator> w;
    for (int i = 0; i < std::abs(m.aExp); ++i) w.push_back(m.aExp > 0 ? Generator::a : Generator::as);
    for (int i = 0; i < m.bExp; ++i) w.push_back(Generator::b);
    for (int i = 0; i < m.bStarExp; ++i) w.push_back(Generator::bs);
    return w;
  }

  S counitLetter(Generator x) const {
    return (x == Generator::a || x == Generator::as) ? alg_.scalars().one() : alg_.scalars().zero();
  }

  S pairWord(UqGenerator g, const std::vector<Generator>& w) const {
    const auto& ctx = alg_.scalars();
    if (g == UqGenerator::k || g == UqGenerator::kinv) {
      S v = ctx.one();
      for (auto x : w) v = v * genValue_[idx(g)][static_cast<int>(x)];
      return v;
    }
    // twisted primitive: sum_i chiL(prefix) <g, w_i> chiR(suffix)
    auto chiL = [&](Generator x) {
      return g == UqGenerator::h ? counitLetter(x) : genValue_[idx(UqGenerator::kinv)][static_cast<int>(x)];
    };
    auto chiR = [&](Generator x) {
      return g == UqGenerator::h ? counitLetter(x) : genValue_[idx(UqGenerator::k)][static_cast<int>(x)];
    };
    std::size_t n = w.size();
    std::vector<S> suffix(n + 1, ctx.one());
    for (std::size_t i = n; i-- > 0;) suffix[i] = chiR(w[i]) * suffix[i + 1];
    S prefix = ctx.one(), total = ctx.zero();
    for (std::size_t i = 0; i < n; ++i) {
      S v = genValue_[idx(g)][static_cast<int>(w[i])];
      if (!v.isZero() && !prefix.isZero()) total += prefix * v * suffix[i + 1];
      prefix = prefix * chiL(w[i]);
    }
    return total;
  }

  void checkRelations() const {
    const auto& ctx = alg_.scalars();
    using G = Generator;
    using Word = std::vector<G>;
    S q = ctx.qpow(1), q2 = ctx.qpow(2), one = ctx.one();
    std::vector<std::vector<std::pair<S, Word>>> relations = {
        {{one, {G::b, G::a}}, {-q, {G::a, G::b}}},
        {{one, {G::bs, G::a}}, {-q, {G::a, G::bs}}},
        {{one, {G::b, G::bs}}, {-one, {G::bs, G::b}}},
        {{one, {G::as, G::bs}}, {-q, {G::bs, G::as}}},
        {{one, {G::as, G::b}}, {-q, {G::b, G::as}}},
        {{one, {G::as, G::a}}, {q2, {G::b, G::bs}}, {-one, {}}},
        {{one, {G::a, G::as}}, {one, {G::b, G::bs}}, {-one, {}}},
    };
    std::vector<UqGenerator> gens = {UqGenerator::e, UqGenerator::f, UqGenerator::k, UqGenerator::kinv};
    if (ctx.qIsOne()) gens.push_back(UqGenerator::h);
    for (auto g : gens)
      for (std::size_t r = 0; r < relations.size(); ++r) {
        S v = ctx.zero();
        for (const auto& [c, w] : relations[r]) v += c * pairWord(g, w);
        if (!v.isZero())
          throw PairingTableError("pairing does not vanish on relation " + std::to_string(r + 1));
      }
    // k and k^-1 must be convolution inverses
    for (auto x : {G::a, G::as, G::b, G::bs}) {
      S v = ctx.zero();
      Monomial m = wordMonomial(x);
      for (const auto& [key, c] : alg_.coproductMonomial(m).terms())
        v += c * pairWord(UqGenerator::k, wordOf(key.first)) * pairWord(UqGenerator::kinv, wordOf(key.second));
      if (!(v == alg_.counit(alg_.monomial(m))))
        throw PairingTableError("k and k^-1 are not inverse under the pairing");
    }
  }

  static Monomial wordMonomial(Generator x) {
    switch (x) {
      case Generator::a: return {1, 0, 0};
      case Generator::as: return {-1, 0, 0};
      case Generator::b: return {0, 1, 0};
      case Generator::bs: return {0, 0, 1};
    }
    return {};
  }

  const Algebra<S>& alg_;
  PairingTable table_;
  std::array<std::array<S, 4>, 5> genValue_;
  std::shared_ptr<Caches> cache_;
};

}  // namespace qsphere
