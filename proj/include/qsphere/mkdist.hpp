#pragma once

// Lower bounds for the Monge-Kantorovich distance between h_N and the counit:
//   sup |h_N(x) - eps(x)| / L(x)  over selfadjoint nonscalar x in F_M.
// The ratio is 0-homogeneous and translation invariant, so we solve
//   min L(t)  subject to  ell(t) = 1,   value = 1 / min,
// by projected subgradient descent with Polyak steps.  L is convex in the
// coordinates, so restarts only guard against slow progress.

#include "qsphere/berezin.hpp"

#include <optional>
#include <random>

namespace qsphere {

enum class DistanceMode { certified, heuristic };

inline std::string toString(DistanceMode m) { return m == DistanceMode::certified ? "certified" : "heuristic"; }
inline DistanceMode parseDistanceMode(const std::string& s) {
  if (s == "certified") return DistanceMode::certified;
  if (s == "heuristic") return DistanceMode::heuristic;
  throw std::invalid_argument("unknown mode '" + s + "'");
}

struct DistanceProblem {
  int N = 1;
  int M = 4;
  int normTruncation = 200;
  DistanceMode mode = DistanceMode::certified;
  int restarts = 8;
  int maxIters = 300;
  std::uint64_t seed = 7;
  std::vector<double> basisScale;  // optional rescaling of the real probe basis
};

template <class S>
struct DistanceEstimate {
  double value = 0;           // recomputed from the witness
  double optimizerValue = 0;  // 1 / min L as seen by the optimizer
  Element<S> witness;
  DistanceMode mode = DistanceMode::certified;
  std::vector<double> trace;  // best value so far, per iteration of the winning restart
  int N = 0, M = 0, normTruncation = 0;
  int bestRestart = -1;
  bool degraded = false;
};

struct ProbeReport {
  double ratio = 0;  // ||x - beta_N x||_lower / L(x)_upper
  double normDefect = 0;
  double lipUpper = 0;
  bool exceedsEstimate = false;
};

struct ApproximantReport {
  double lipSlack = 0;   // L(x) - L(beta_N x), lower bounds
  double distSlack = 0;  // ||x - beta_N x|| lower bound
};

template <class S>
class DistanceEstimator {
 public:
  using Elem = Element<S>;

  DistanceEstimator(const Berezin<S>& ber, const SpectralNorms<S>& norms)
      : ber_(ber), norms_(norms), gns_(ber.gns()), alg_(ber.gns().algebra()), act_(ber.gns().actions()) {}

  // v (weight 0) or v + v*, i(v - v*) (positive weight), spin >= 1
  std::vector<Elem> selfadjointBasis(int M) const {
    std::vector<Elem> out;
    const auto& ctx = alg_.scalars();
    for (const auto& v : gns_.basis(M).vectors) {
      if (v.spin == 0 || v.weight < 0) continue;
      Elem vs = alg_.involution(v.vector);
      if (v.weight == 0 && vs == v.vector) {
        out.push_back(v.vector);
      } else {
        out.push_back(v.vector + vs);
        out.push_back((v.vector - vs) * ctx.imag());
        if (v.weight == 0) throw std::logic_error("weight-zero basis vector is not selfadjoint");
      }
    }
    return out;
  }

  double objectiveOf(const Elem& x, const DistanceProblem& p) const {
    double num = std::abs((ber_.hN(x, p.N) - alg_.counit(x)).toComplex());
    double den = lipScale(x, p);
    return den > 0 ? num / den : 0;
  }

  DistanceEstimate<S> estimate(const DistanceProblem& p, const std::optional<Elem>& warm = std::nullopt) const {
    if (p.N < 1 || p.M < 1) throw std::invalid_argument("distance estimate needs N >= 1 and M >= 1");
    Setup su = setup(p);
    DistanceEstimate<S> est;
    est.mode = p.mode;
    est.N = p.N;
    est.M = p.M;
    est.normTruncation = p.normTruncation;
    if (su.ellNorm2 == 0) {
      est.degraded = true;
      est.witness = alg_.one() * alg_.scalars().zero();
      return est;
    }

    std::vector<Eigen::VectorXd> starts;
    if (warm) starts.push_back(coordinates(su, *warm));
    // the fixed probes that live in F_M are feasible points worth starting from
    for (const auto& [name, x] : probeSuite())
      if (Berezin<S>::sphereSpin(x) <= p.M) starts.push_back(coordinates(su, x));
    if (p.mode == DistanceMode::heuristic) {
      // the certified optimum is feasible here with a smaller constraint value
      DistanceProblem cp = p;
      cp.mode = DistanceMode::certified;
      auto c = run(setup(cp), cp, starts);
      starts.push_back(c.best);
    }
    auto result = run(su, p, starts);
    est.optimizerValue = result.value;
    est.bestRestart = result.restart;
    est.trace = result.trace;
    est.witness = witnessOf(su, result.best);
    est.value = objectiveOf(est.witness, p);
    est.degraded = result.value <= 0;
    return est;
  }

  ProbeReport probe(const Elem& x, int N, double dEstimate, int truncation, double gap) const {
    if (!x.hasOnlyRightDegreeZero()) throw std::invalid_argument("probe must be a sphere element");
    auto lip = norms_.lipNorm(x, truncation).value;
    if (lip.upperBound == 0) throw std::invalid_argument("probe is scalar: its Lip-norm vanishes");
    ProbeReport r;
    r.normDefect = norms_.operatorNorm(x - ber_.viaSpectrum(x, N), truncation).lowerBound;
    r.lipUpper = lip.upperBound;
    r.ratio = r.normDefect / r.lipUpper;
    r.exceedsEstimate = r.ratio > dEstimate + gap;
    return r;
  }

  ApproximantReport approximant(const Elem& x, int N, int truncation, Elem* y = nullptr) const {
    Elem bx = ber_.viaSpectrum(x, N);
    ApproximantReport r;
    r.lipSlack = norms_.lipNorm(x, truncation).value.lowerBound - norms_.lipNorm(bx, truncation).value.lowerBound;
    r.distSlack = norms_.operatorNorm(x - bx, truncation).lowerBound;
    if (y) *y = std::move(bx);
    return r;
  }

  // A, B + Bs, i(B - Bs), A^2, AB + Bs A with their counit removed
  std::vector<std::pair<std::string, Elem>> probeSuite() const {
    const auto& ctx = alg_.scalars();
    Elem A = alg_.A(), B = alg_.B(), Bs = alg_.Bs();
    std::vector<std::pair<std::string, Elem>> out = {
        {"A", A},
        {"B + Bs", B + Bs},
        {"i*(B - Bs)", (B - Bs) * ctx.imag()},
        {"A^2", alg_.multiply(A, A)},
        {"A*B + Bs*A", alg_.multiply(A, B) + alg_.multiply(Bs, A)}};
    for (auto& [name, x] : out) x -= alg_.one() * alg_.counit(x);
    return out;
  }

 private:
  struct Setup {
    std::vector<Elem> basis;
    std::vector<double> scale;  // applied to basis[i] before use
    Eigen::VectorXd ell;
    double ellNorm2 = 0;
    Eigen::MatrixXd gram;  // real part of <g_i, g_j>, scaled
    // heuristic: union sparsity pattern of the block matrices, values = V * t
    CSparse pattern;
    std::vector<std::pair<int, int>> entries;
    Eigen::MatrixXcd values;
    // certified: per block, coefficient matrix over the monomials of delta(g_i)
    std::array<Eigen::MatrixXcd, 4> coeff;
  };

  struct RunResult {
    Eigen::VectorXd best;
    double value = 0;
    int restart = -1;
    std::vector<double> trace;
  };

  double lipScale(const Elem& x, const DistanceProblem& p) const {
    auto lip = norms_.lipNorm(x, p.normTruncation).value;
    return p.mode == DistanceMode::certified ? lip.upperBound : lip.lowerBound;
  }

  Setup setup(const DistanceProblem& p) const {
    Setup su;
    su.basis = selfadjointBasis(p.M);
    const std::size_t d = su.basis.size();
    if (!p.basisScale.empty() && p.basisScale.size() != d)
      throw std::invalid_argument("basisScale has the wrong length");
    su.ell.resize(d);
    su.gram.resize(d, d);
    for (std::size_t i = 0; i < d; ++i) {
      if (!p.basisScale.empty()) su.basis[i] = su.basis[i] * alg_.scalars().fromComplexDouble(p.basisScale[i]);
      // unit L^2 length makes the search independent of how the basis was scaled
      su.scale.push_back(1 / std::sqrt(gns_.haarInner(su.basis[i], su.basis[i]).toComplex().real()));
    }
    for (std::size_t i = 0; i < d; ++i) {
      su.ell(i) = (ber_.hN(su.basis[i], p.N) - alg_.counit(su.basis[i])).toComplex().real() * su.scale[i];
      for (std::size_t j = 0; j < d; ++j)
        su.gram(i, j) = gns_.haarInner(su.basis[i], su.basis[j]).toComplex().real() * su.scale[i] * su.scale[j];
    }
    su.ellNorm2 = su.ell.squaredNorm();

    std::vector<std::array<Elem, 4>> deltas;
    for (const auto& g : su.basis) deltas.push_back(act_.deltaMatrix(g));
    if (p.mode == DistanceMode::certified) {
      for (int blk = 0; blk < 4; ++blk) {
        std::map<Monomial, int> index;
        for (const auto& dm : deltas)
          for (const auto& [m, c] : dm[blk].terms()) index.try_emplace(m, static_cast<int>(index.size()));
        su.coeff[blk] = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(index.size()), d);
        for (std::size_t i = 0; i < d; ++i)
          for (const auto& [m, c] : deltas[i][blk].terms()) su.coeff[blk](index[m], i) = c.toComplex() * su.scale[i];
      }
    } else {
      std::map<std::pair<int, int>, int> index;
      std::vector<CSparse> mats;
      for (const auto& dm : deltas) mats.push_back(norms_.representBlock(dm, p.normTruncation));
      for (const auto& m : mats)
        for (int k = 0; k < m.outerSize(); ++k)
          for (CSparse::InnerIterator it(m, k); it; ++it)
            index.try_emplace({static_cast<int>(it.row()), static_cast<int>(it.col())}, 0);
      std::vector<Eigen::Triplet<Complex>> trip;
      for (auto& [rc, pos] : index) trip.emplace_back(rc.first, rc.second, Complex(1));
      su.pattern = CSparse(2 * p.normTruncation, 2 * p.normTruncation);
      su.pattern.setFromTriplets(trip.begin(), trip.end());
      su.pattern.makeCompressed();
      int k = 0;
      for (int col = 0; col < su.pattern.outerSize(); ++col)
        for (CSparse::InnerIterator it(su.pattern, col); it; ++it, ++k) {
          index[{static_cast<int>(it.row()), static_cast<int>(it.col())}] = k;
          su.entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()));
        }
      su.values = Eigen::MatrixXcd::Zero(k, d);
      for (std::size_t i = 0; i < d; ++i)
        for (int col = 0; col < mats[i].outerSize(); ++col)
          for (CSparse::InnerIterator it(mats[i], col); it; ++it)
            su.values(index[{static_cast<int>(it.row()), static_cast<int>(it.col())}], i) = it.value() * su.scale[i];
    }
    return su;
  }

  // constraint value and a subgradient at t
  std::pair<double, Eigen::VectorXd> evaluate(const Setup& su, const DistanceProblem& p, const Eigen::VectorXd& t) const {
    const auto d = t.size();
    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    if (p.mode == DistanceMode::certified) {
      Eigen::Matrix2d sums;
      std::array<Eigen::VectorXcd, 4> z;
      for (int blk = 0; blk < 4; ++blk) {
        z[blk] = su.coeff[blk] * t.cast<Complex>();
        sums(blk / 2, blk % 2) = z[blk].cwiseAbs().sum();
      }
      Eigen::JacobiSVD<Eigen::Matrix2d> svd(sums, Eigen::ComputeFullU | Eigen::ComputeFullV);
      double value = svd.singularValues()(0);
      Eigen::Vector2d u = svd.matrixU().col(0).cwiseAbs(), v = svd.matrixV().col(0).cwiseAbs();
      for (int blk = 0; blk < 4; ++blk) {
        double w = u(blk / 2) * v(blk % 2);
        if (w == 0) continue;
        Eigen::VectorXcd phase = z[blk];
        for (Eigen::Index m = 0; m < phase.size(); ++m)
          phase(m) = std::abs(z[blk](m)) > 0 ? std::conj(z[blk](m)) / std::abs(z[blk](m)) : Complex(0);
        g += w * (su.coeff[blk].transpose() * phase).real();
      }
      return {value, g};
    }
    CSparse m = su.pattern;
    Eigen::VectorXcd vals = su.values * t.cast<Complex>();
    std::copy(vals.data(), vals.data() + vals.size(), m.valuePtr());
    auto pair = dominantSingularPair(m, norms_.config().solver);
    Eigen::VectorXcd w(su.entries.size());
    for (std::size_t k = 0; k < su.entries.size(); ++k)
      w(k) = std::conj(pair.left(su.entries[k].first)) * pair.right(su.entries[k].second);
    g = (su.values.transpose() * w).real();
    return {pair.sigma, g};
  }

  RunResult run(const Setup& su, const DistanceProblem& p, const std::vector<Eigen::VectorXd>& seeds) const {
    const auto d = su.ell.size();
    std::mt19937_64 rng(p.seed);
    std::normal_distribution<double> gauss;
    auto project = [&](Eigen::VectorXd t) { return Eigen::VectorXd(t - (su.ell.dot(t) - 1) / su.ellNorm2 * su.ell); };
    auto tangent = [&](const Eigen::VectorXd& g) { return Eigen::VectorXd(g - su.ell.dot(g) / su.ellNorm2 * su.ell); };

    std::vector<Eigen::VectorXd> starts;
    for (const auto& s : seeds)
      if (std::abs(su.ell.dot(s)) > 1e-14) starts.push_back(s / su.ell.dot(s));
    Eigen::VectorXd center = su.ell / su.ellNorm2;
    starts.push_back(center);
    for (int r = 1; r < p.restarts; ++r) {
      Eigen::VectorXd xi(d);
      for (Eigen::Index i = 0; i < d; ++i) xi(i) = gauss(rng);
      starts.push_back(project(center + tangent(xi) * (center.norm() / std::sqrt(static_cast<double>(d)))));
    }

    RunResult out;
    double bestOverall = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < starts.size(); ++r) {
      Eigen::VectorXd t = project(starts[r]);
      auto [f, g] = evaluate(su, p, t);
      double best = f;
      Eigen::VectorXd bestT = t;
      std::vector<double> trace{best > 0 ? 1 / best : 0};
      // Polyak steps towards the level best - slack; the slack halves whenever
      // a stretch of iterations fails to close half of it
      double slack = 0.1 * f, levelStart = best;
      int sinceReset = 0;
      for (int it = 0; it < p.maxIters && f > 0; ++it) {
        Eigen::VectorXd pg = tangent(g);
        double n2 = pg.squaredNorm();
        if (n2 <= 1e-30) break;  // stationary on the constraint plane
        double step = (f - best + slack) / n2;
        t = project(t - step * pg);
        std::tie(f, g) = evaluate(su, p, t);
        if (f < best) {
          best = f;
          bestT = t;
        }
        trace.push_back(1 / best);
        if (best <= levelStart - slack / 2) {
          levelStart = best;
          sinceReset = 0;
        } else if (++sinceReset >= 15) {
          slack /= 2;
          levelStart = best;
          sinceReset = 0;
          t = bestT;
          std::tie(f, g) = evaluate(su, p, t);
        }
        if (slack <= 1e-13 * best) break;
      }
      // ties go to the lowest restart index
      if (best < bestOverall) {
        bestOverall = best;
        out.best = bestT;
        out.restart = static_cast<int>(r);
        out.trace = std::move(trace);
      }
    }
    out.value = bestOverall > 0 && std::isfinite(bestOverall) ? 1 / bestOverall : 0;
    return out;
  }

  Elem witnessOf(const Setup& su, const Eigen::VectorXd& t) const {
    Elem x;
    for (Eigen::Index i = 0; i < t.size(); ++i)
      x += su.basis[i] * alg_.scalars().rational(Rational(t(i) * su.scale[i]));
    return x;
  }

  Eigen::VectorXd coordinates(const Setup& su, const Elem& x) const {
    Eigen::VectorXd rhs(su.basis.size());
    for (std::size_t i = 0; i < su.basis.size(); ++i)
      rhs(i) = gns_.haarInner(su.basis[i], x).toComplex().real() * su.scale[i];
    return su.gram.ldlt().solve(rhs);
  }

  const Berezin<S>& ber_;
  const SpectralNorms<S>& norms_;
  const Gns<S>& gns_;
  const Algebra<S>& alg_;
  const UqActions<S>& act_;
};

}  // namespace qsphere
