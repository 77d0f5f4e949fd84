#pragma once

// Verification suites run by `verify` and the acceptance harness.  Every suite
// returns per-check statuses; an exact identity that fails is always `fail`.
// `warn` is reserved for numerical quality events (unconverged estimates,
// probes beating the heuristic distance estimate).

#include "qsphere/mkdist.hpp"

#include <chrono>
#include <functional>
#include <random>
#include <sstream>

namespace qsphere {

enum class CheckStatus { pass, warn, fail };

inline std::string toString(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::warn: return "warn";
    case CheckStatus::fail: return "fail";
  }
  return "?";
}

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double residual = 0;
  int cases = 0;
  int flagged = 0;     // cases that did not pass
  std::string detail;  // first offending case
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0;
  nlohmann::json table = nlohmann::json::array();  // suite-specific rows

  bool passed() const {
    return std::none_of(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::fail; });
  }
  bool clean() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.status == CheckStatus::pass; });
  }

  nlohmann::json toJson(bool timings) const {
    nlohmann::json cs = nlohmann::json::array();
    for (const auto& c : checks) {
      nlohmann::json j = {{"name", c.name}, {"status", toString(c.status)}, {"residual", c.residual}, {"cases", c.cases}};
      if (c.flagged > 0) j["flagged"] = c.flagged;
      if (!c.detail.empty()) j["detail"] = c.detail;
      cs.push_back(j);
    }
    nlohmann::json j = {{"suite", suite}, {"passed", passed()}, {"checks", cs}};
    if (!table.empty()) j["table"] = table;
    if (timings) j["seconds"] = seconds;
    return j;
  }
};

// accumulates one named check over many cases
class Check {
 public:
  explicit Check(std::string name) { r_.name = std::move(name); }

  // exact identity: residual is the size of the defect
  void identity(bool holds, double residual, const std::string& where) {
    ++r_.cases;
    r_.residual = std::max(r_.residual, residual);
    if (!holds) mark(CheckStatus::fail, where);
  }
  void inequality(bool holds, double excess, const std::string& where, CheckStatus onFailure = CheckStatus::fail) {
    ++r_.cases;
    r_.residual = std::max(r_.residual, excess);
    if (!holds) mark(onFailure, where);
  }
  void flag(CheckStatus s, const std::string& where) { mark(s, where); }
  CheckResult result() const { return r_; }

 private:
  void mark(CheckStatus s, const std::string& where) {
    if (s != CheckStatus::pass) ++r_.flagged;
    if (static_cast<int>(s) > static_cast<int>(r_.status)) {
      r_.status = s;
      r_.detail = where;
    }
  }
  CheckResult r_;
};

struct SuiteOptions {
  std::uint64_t seed = 2024;
  int hopfDegree = 5;
  int derivationPairs = 100;
  int derivationDegree = 3;
  int projectionLevel = 5;
  int berezinElements = 50;
  int berezinDegree = 4;
  int berezinMaxN = 3;
  int lipElements = 50;
  int lipDegree = 4;
  int lipMaxN = 5;
  double contractionTol = 1e-6;
  int oracleElements = 20;
  int oracleDegree = 3;
  double oracleTol = 1e-4;
  int sliceTriples = 20;
  int sliceDegree = 2;
  double sliceTol = 1e-4;
  int truncation = 200;
  int distMinN = 1;
  int distMaxN = 5;
  DistanceProblem distance;  // N is overwritten per row
  double gap = 1e-3;
  double trendTol = 1e-3;
  int spectrumMaxN = 5;
  int spectrumSpins = 2;
};

// seeded random elements with small Gaussian-integer rational coefficients
template <class S>
class SuiteSampler {
 public:
  SuiteSampler(const Algebra<S>& alg, std::uint64_t seed) : alg_(alg), rng_(seed) {}

  Element<S> element(int maxDegree, bool sphereOnly, int maxTerms = 4) {
    std::vector<Monomial> pool;
    for (const auto& m : UqActions<S>::monomialsUpTo(maxDegree))
      if (!sphereOnly || m.rightDegree() == 0) pool.push_back(m);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_int_distribution<int> count(1, maxTerms), num(-5, 5), den(1, 4);
    const auto& ctx = alg_.scalars();
    Element<S> x;
    int n = count(rng_);
    for (int i = 0; i < n; ++i) {
      S c = ctx.rational(Rational(num(rng_), den(rng_))) + ctx.imag() * ctx.rational(Rational(num(rng_), den(rng_)));
      x.add(pool[pick(rng_)], c);
    }
    if (x.isZero()) x = alg_.one();
    return x;
  }

  // nonscalar sphere element
  Element<S> sphereElement(int maxDegree) {
    for (;;) {
      auto x = element(maxDegree, true);
      if (x.degree() > 0) return x;
    }
  }

 private:
  const Algebra<S>& alg_;
  std::mt19937_64 rng_;
};

template <class S>
class Verifier {
 public:
  using Elem = Element<S>;

  Verifier(const DistanceEstimator<S>& dist, const Berezin<S>& ber, const SpectralNorms<S>& norms,
           SuiteOptions opt = {})
      : dist_(dist), ber_(ber), norms_(norms), gns_(ber.gns()), act_(gns_.actions()), alg_(gns_.algebra()),
        opt_(std::move(opt)) {}

  static std::vector<std::string> suiteNames() {
    return {"hopf", "derivations", "projections", "berezin", "contraction", "oracles", "slice", "spectrum", "theoremB"};
  }

  SuiteReport run(const std::string& name) const {
    static const std::map<std::string, SuiteReport (Verifier::*)() const> table = {
        {"hopf", &Verifier::hopf},           {"derivations", &Verifier::derivations},
        {"projections", &Verifier::projections}, {"berezin", &Verifier::berezin},
        {"contraction", &Verifier::contraction}, {"oracles", &Verifier::oracles},
        {"slice", &Verifier::slice},         {"spectrum", &Verifier::spectrum},
        {"theoremB", &Verifier::theoremB}};
    auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("unknown suite '" + name + "'");
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport r = (this->*(it->second))();
    r.suite = name;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
  }

  // associativity on all triples of monomials of degree <= D, the coalgebra
  // axioms and Haar bi-invariance on every monomial of degree <= D
  SuiteReport hopf() const {
    const int D = opt_.hopfDegree;
    auto monos = UqActions<S>::monomialsUpTo(D);
    Check assoc("associativity"), coassoc("coassociativity"), counit("counit"), antipode("antipode"),
        haar("haar bi-invariance");
    std::vector<Elem> el;
    for (const auto& m : monos) el.push_back(alg_.monomial(m));
    for (std::size_t i = 0; i < el.size(); ++i)
      for (std::size_t j = 0; j < el.size(); ++j) {
        Elem xy = alg_.multiply(el[i], el[j]);
        for (std::size_t k = 0; k < el.size(); ++k) {
          Elem d = alg_.multiply(xy, el[k]) - alg_.multiply(el[i], alg_.multiply(el[j], el[k]));
          bool holds = d.isZero();
          assoc.identity(holds, holds ? 0.0 : size(d), holds ? std::string() : triple(monos[i], monos[j], monos[k]));
        }
      }
    auto eps = [&](const Monomial& mm) { return alg_.counit(alg_.monomial(mm)); };
    auto h = [&](const Monomial& mm) { return alg_.haarMonomial(mm); };
    for (const auto& m : monos) {
      Elem x = alg_.monomial(m);
      const auto& dx = alg_.coproductMonomial(m);
      Tensor3<S> lhs, rhs;
      for (const auto& [k, c] : dx.terms()) {
        const auto& dl = alg_.coproductMonomial(k.first);
        for (const auto& [k2, c2] : dl.terms()) lhs.add(k2.first, k2.second, k.second, c * c2);
        const auto& dr = alg_.coproductMonomial(k.second);
        for (const auto& [k2, c2] : dr.terms()) rhs.add(k.first, k2.first, k2.second, c * c2);
      }
      coassoc.identity(lhs == rhs, lhs == rhs ? 0 : 1, monomialString(m));

      Elem cl = alg_.sliceLeft(dx, eps) - x, cr = alg_.sliceRight(dx, eps) - x;
      counit.identity(cl.isZero() && cr.isZero(), size(cl) + size(cr), monomialString(m));

      Elem left, right;
      for (const auto& [k, c] : dx.terms()) {
        left += alg_.multiply(alg_.antipodeMonomial(k.first), alg_.monomial(k.second)) * c;
        right += alg_.multiply(alg_.monomial(k.first), alg_.antipodeMonomial(k.second)) * c;
      }
      Elem target = alg_.one() * alg_.counit(x);
      left -= target;
      right -= target;
      antipode.identity(left.isZero() && right.isZero(), size(left) + size(right), monomialString(m));

      Elem hx = alg_.one() * alg_.haarMonomial(m);
      Elem hl = alg_.sliceLeft(dx, h) - hx, hr = alg_.sliceRight(dx, h) - hx;
      haar.identity(hl.isZero() && hr.isZero(), size(hl) + size(hr), monomialString(m));
    }
    return report({assoc, coassoc, counit, antipode, haar});
  }

  SuiteReport derivations() const {
    SuiteSampler<S> sample(alg_, opt_.seed);
    Check leibniz("twisted Leibniz"), star("star compatibility"), annihil("Haar annihilation"),
        trace("twisted trace");
    const auto labels = {DerivationLabel::delta1, DerivationLabel::delta2, DerivationLabel::delta3};
    for (int i = 0; i < opt_.derivationPairs; ++i) {
      Elem x = sample.element(opt_.derivationDegree, false), y = sample.element(opt_.derivationDegree, false);
      std::string where = "pair " + std::to_string(i);
      auto defect = act_.leibnizDefect(x, y);
      leibniz.identity(!defect, defect ? 1 : 0, where + (defect ? ": " + *defect : ""));

      Elem xs = alg_.involution(x);
      Elem s1 = act_.twistedDerivation(DerivationLabel::delta1, xs) +
                alg_.involution(act_.twistedDerivation(DerivationLabel::delta2, x));
      Elem s3 = act_.twistedDerivation(DerivationLabel::delta3, xs) +
                alg_.involution(act_.twistedDerivation(DerivationLabel::delta3, x));
      star.identity(s1.isZero() && s3.isZero(), size(s1) + size(s3), where);

      double worst = 0;
      bool zero = true;
      for (auto lab : labels)
        for (const auto& z : {x, y}) {
          S v = alg_.haarState(act_.twistedDerivation(lab, z));
          zero = zero && v.isZero();
          worst = std::max(worst, v.magnitude());
        }
      annihil.identity(zero, worst, where);

      S t = alg_.haarState(alg_.multiply(x, y)) - alg_.haarState(alg_.multiply(act_.modularAutomorphism(y, false), x));
      trace.identity(t.isZero(), t.magnitude(), where);
    }
    return report({leibniz, star, annihil, trace});
  }

  // compressed derivation matrices: D1 = q^-1 D2^dagger, D3 selfadjoint, and
  // each D_j commutes with the spin filtration projections
  SuiteReport projections() const {
    const auto& ctx = alg_.scalars();
    Check adj12("adjoint D1 = q^-1 D2^dagger"), adj33("D3 selfadjoint"), commute("P_N commutation");
    for (int M = 0; M <= opt_.projectionLevel; ++M) {
      auto d1 = gns_.operatorMatrixOf(DerivationLabel::delta1, M);
      auto d2 = gns_.operatorMatrixOf(DerivationLabel::delta2, M);
      auto d3 = gns_.operatorMatrixOf(DerivationLabel::delta3, M);
      S a = gns_.adjointDefect(d1, d2, ctx.qpow(-1)), b = gns_.adjointDefect(d3, d3, ctx.one());
      adj12.identity(negligible(a), a.magnitude(), "M = " + std::to_string(M));
      adj33.identity(negligible(b), b.magnitude(), "M = " + std::to_string(M));
      for (auto lab : {DerivationLabel::delta1, DerivationLabel::delta2, DerivationLabel::delta3})
        for (int N = 0; N <= M; ++N) {
          S c = gns_.pnCommutationCheck(lab, N, M);
          commute.identity(negligible(c), c.magnitude(),
                           toString(lab) + ", N = " + std::to_string(N) + ", M = " + std::to_string(M));
        }
    }
    return report({adj12, adj33, commute});
  }

  SuiteReport berezin() const {
    SuiteSampler<S> sample(alg_, opt_.seed + 1);
    Check routes("coproduct route = spectral route"), unit("c_{N,0} = 1"), cutoff("c_{N,n} = 0 for n > N");
    for (int N = 1; N <= opt_.berezinMaxN; ++N) {
      auto spec = ber_.spectrum(N, N + 2);
      S u = spec.at(0) - alg_.scalars().one();
      unit.identity(negligible(u), u.magnitude(), "N = " + std::to_string(N));
      for (int n = N + 1; n <= N + 2; ++n)
        cutoff.identity(negligible(spec.at(n)), spec.at(n).magnitude(),
                        "N = " + std::to_string(N) + ", n = " + std::to_string(n));
    }
    for (int i = 0; i < opt_.berezinElements; ++i) {
      Elem x = sample.element(opt_.berezinDegree, true, 5);
      for (int N = 1; N <= opt_.berezinMaxN; ++N) {
        Elem d = ber_.viaCoproduct(x, N) - ber_.viaSpectrum(x, N);
        routes.identity(d.isZero(), size(d), "element " + std::to_string(i) + ", N = " + std::to_string(N));
      }
    }
    return report({routes, unit, cutoff});
  }

  // L(beta_N x) <= L(x) through both bounds
  SuiteReport contraction() const {
    SuiteSampler<S> sample(alg_, opt_.seed + 2);
    Check crude("L_lower(beta_N x) <= L_upper(x)"), tight("L(beta_N x) <= L(x)(1 + tol)");
    for (int i = 0; i < opt_.lipElements; ++i) {
      Elem x = sample.sphereElement(opt_.lipDegree);
      auto lx = norms_.lipNorm(x, opt_.truncation).value;
      for (int N = 1; N <= opt_.lipMaxN; ++N) {
        auto ly = norms_.lipNorm(ber_.viaSpectrum(x, N), opt_.truncation).value;
        std::string where = "element " + std::to_string(i) + ", N = " + std::to_string(N);
        crude.inequality(ly.lowerBound <= lx.upperBound, std::max(0.0, ly.lowerBound - lx.upperBound), where);
        if (!(lx.converged && ly.converged)) {
          tight.flag(CheckStatus::warn, where + ": unconverged estimate");
          continue;
        }
        double excess = lx.lowerBound > 0 ? ly.lowerBound / lx.lowerBound - 1 : ly.lowerBound;
        tight.inequality(ly.lowerBound <= lx.lowerBound * (1 + opt_.contractionTol), std::max(0.0, excess), where);
      }
    }
    return report({crude, tight});
  }

  // ||delta(x)|| from the block matrix against max(||d1||, ||d2||) on H_+-
  SuiteReport oracles() const {
    SuiteSampler<S> sample(alg_, opt_.seed + 3);
    Check agree("lipNorm ~ Gram oracle");
    for (int i = 0; i < opt_.oracleElements; ++i) {
      Elem x = sample.sphereElement(opt_.oracleDegree);
      auto lx = norms_.lipNorm(x, opt_.truncation).value;
      auto gx = norms_.lipNormGramOracle(x, opt_.truncation);
      double rel = std::abs(lx.lowerBound - gx.lowerBound) / std::max(lx.lowerBound, 1e-300);
      std::string where = "element " + std::to_string(i);
      agree.inequality(rel <= opt_.oracleTol, rel, where);
      if (!(lx.converged && gx.converged)) agree.flag(CheckStatus::warn, where + ": unconverged estimate");
    }
    return report({agree});
  }

  SuiteReport slice() const {
    SuiteSampler<S> sample(alg_, opt_.seed + 4);
    Check bound("L(slice) <= |xi||zeta| L(x)");
    for (int i = 0; i < opt_.sliceTriples; ++i) {
      Elem x = sample.sphereElement(opt_.sliceDegree);
      Elem xi = sample.element(opt_.sliceDegree, false), zeta = sample.element(opt_.sliceDegree, false);
      auto r = ber_.sliceLipCheck(x, xi, zeta, norms_, opt_.truncation, opt_.sliceTol);
      std::string where = "triple " + std::to_string(i);
      double excess = r.bound > 0 ? r.lipOfSlice / r.bound - 1 : r.lipOfSlice;
      bound.inequality(r.holds, std::max(0.0, excess), where);
      if (!r.converged) bound.flag(CheckStatus::warn, where + ": unconverged estimate");
    }
    return report({bound});
  }

  // 0 <= c_{N,n} <= 1, c_{N,0} = 1, and c_{N,n} increasing in N for small spins
  SuiteReport spectrum() const {
    Check range("0 <= c <= 1"), unit("c_{N,0} = 1"), growth("c_{N,n} increasing in N");
    const int top = std::max(opt_.spectrumMaxN, opt_.spectrumSpins);
    std::vector<std::vector<double>> c;
    for (int N = 1; N <= opt_.spectrumMaxN; ++N) {
      auto spec = ber_.spectrum(N, top);
      std::vector<double> row;
      nlohmann::json jr = {{"N", N}};
      for (int n = 0; n <= top; ++n) {
        S v = spec.at(n);
        double d = v.toComplex().real();
        row.push_back(d);
        bool inRange = v.isReal() && v.realSign() >= 0 && (alg_.scalars().one() - v).realSign() >= 0;
        range.inequality(inRange, std::max({0.0, -d, d - 1}), "N = " + std::to_string(N) + ", n = " + std::to_string(n));
        jr["c"].push_back(d);
      }
      S u = spec.at(0) - alg_.scalars().one();
      unit.identity(negligible(u), u.magnitude(), "N = " + std::to_string(N));
      if (!c.empty())
        for (int n = 0; n <= opt_.spectrumSpins; ++n) {
          double drop = c.back()[n] - row[n];
          growth.inequality(drop <= opt_.trendTol, std::max(0.0, drop),
                            "N = " + std::to_string(N) + ", n = " + std::to_string(n));
        }
      c.push_back(row);
    }
    auto r = report({range, unit, growth});
    for (std::size_t i = 0; i < c.size(); ++i) r.table.push_back({{"N", i + 1}, {"c", c[i]}});
    return r;
  }

  // certified and heuristic distance estimates, probe ratios and approximant slacks per N
  SuiteReport theoremB() const {
    Check order("certified <= heuristic"), dTrend("dist_lb non-increasing"), rTrend("max probe ratio non-increasing"),
        probes("probe ratio <= heuristic + gap"), slack("lipSlack >= -1e-6");
    auto suite = dist_.probeSuite();
    std::optional<Elem> warm;
    double prevD = 0, prevR = 0;
    SuiteReport out;
    for (int N = opt_.distMinN; N <= opt_.distMaxN; ++N) {
      std::string where = "N = " + std::to_string(N);
      DistanceProblem p = opt_.distance;
      p.N = N;
      p.mode = DistanceMode::certified;
      auto cert = dist_.estimate(p, warm);
      warm = cert.witness;
      p.mode = DistanceMode::heuristic;
      auto heur = dist_.estimate(p);
      order.inequality(cert.value <= heur.value * (1 + 1e-9) + 1e-12, std::max(0.0, cert.value - heur.value), where);

      double rmax = 0, slackSum = 0;
      nlohmann::json ratios = nlohmann::json::object();
      for (const auto& [name, x] : suite) {
        auto r = dist_.probe(x, N, heur.value, opt_.distance.normTruncation, opt_.gap);
        rmax = std::max(rmax, r.ratio);
        ratios[name] = r.ratio;
        probes.inequality(!r.exceedsEstimate, std::max(0.0, r.ratio - heur.value), where + ", probe " + name,
                          CheckStatus::warn);
        auto a = dist_.approximant(x, N, opt_.distance.normTruncation);
        slackSum += a.lipSlack;
        slack.inequality(a.lipSlack >= -1e-6, std::max(0.0, -a.lipSlack), where + ", probe " + name);
      }
      double meanSlack = slackSum / static_cast<double>(suite.size());
      if (N > opt_.distMinN) {
        dTrend.inequality(cert.value <= prevD + opt_.trendTol, std::max(0.0, cert.value - prevD), where);
        rTrend.inequality(rmax <= prevR + opt_.trendTol, std::max(0.0, rmax - prevR), where);
      }
      if (cert.degraded) dTrend.flag(CheckStatus::warn, where + ": degraded estimate");
      prevD = cert.value;
      prevR = rmax;
      out.table.push_back({{"N", N},
                           {"dist_lb", cert.value},
                           {"heuristic", heur.value},
                           {"max_probe_ratio", rmax},
                           {"mean_lipSlack", meanSlack},
                           {"probe_ratios", ratios}});
    }
    auto r = report({order, dTrend, rTrend, probes, slack});
    r.table = std::move(out.table);
    return r;
  }

 private:
  static double size(const Elem& x) { return SpectralNorms<S>::coefficientSum(x); }

  static std::string triple(const Monomial& a, const Monomial& b, const Monomial& c) {
    return monomialString(a) + " | " + monomialString(b) + " | " + monomialString(c);
  }

  static SuiteReport report(std::initializer_list<Check> checks) {
    SuiteReport r;
    for (const auto& c : checks) r.checks.push_back(c.result());
    return r;
  }

  const DistanceEstimator<S>& dist_;
  const Berezin<S>& ber_;
  const SpectralNorms<S>& norms_;
  const Gns<S>& gns_;
  const UqActions<S>& act_;
  const Algebra<S>& alg_;
  SuiteOptions opt_;
};

// N, dist_lb, max_probe_ratio, mean_lipSlack
inline std::string theoremBCsv(const SuiteReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "N,dist_lb,max_probe_ratio,mean_lipSlack\n";
  for (const auto& row : r.table)
    out << row.at("N").get<int>() << ',' << row.at("dist_lb").get<double>() << ','
        << row.at("max_probe_ratio").get<double>() << ',' << row.at("mean_lipSlack").get<double>() << '\n';
  return out.str();
}

}  // namespace qsphere
