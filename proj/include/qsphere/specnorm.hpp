#pragma once

// Operator norms in the weighted-shift representations
//   a e_n = sqrt(1 - q^{2n+2}) e_{n+1},   b e_n = e^{i theta} q^n e_n
// compressed to span{e_0..e_{M-1}}, and the Lip-norm ||delta(x)|| built on them.
// At q = 1 the representations degenerate to points of SU(2) and norms become
// maxima over an angle grid.

#include "qsphere/actions.hpp"
#include "qsphere/lanczos.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace qsphere {

struct NormConfig {
  int truncation = 0;     // 0: max(100, 10 * degree)
  int doublings = 4;      // convergence ladder M, 2M, 4M, ...
  double relTol = 1e-10;  // relative change that counts as converged
  int thetaGrid = 16;
  int classicalGrid = 64;  // q = 1 angle grid per axis
  LanczosOptions solver{};
};

struct NormEstimate {
  double lowerBound = 0;
  double upperBound = 0;
  bool converged = false;
  bool solverConverged = true;
  std::vector<int> mLadder;
  std::vector<double> ladderValues;
  std::vector<double> perTheta;  // values on the theta grid at the final M
  int thetaGridSize = 1;
  int mUsed = 0;

  double gap() const { return upperBound - lowerBound; }
};

template <class S>
struct LipResult {
  NormEstimate value;
  std::array<Element<S>, 4> components;  // [[-d3, d2], [d1, d3]] row-major
};

// h(f(bb*)) = sum_n (1 - q^2) q^{2n} f(q^{2n}) ; this is the atom weight of e_n
inline double atomWeight(double q, int n) { return (1 - q * q) * std::pow(q, 2 * n); }

template <class S>
class SpectralNorms {
 public:
  using Elem = Element<S>;

  SpectralNorms(const UqActions<S>& actions, NormConfig cfg = {})
      : actions_(actions), alg_(actions.algebra()), cfg_(cfg) {
    q_ = alg_.scalars().qDouble();
    if (!(q_ > 0 && q_ <= 1)) throw std::invalid_argument("q must lie in (0, 1]");
  }

  const NormConfig& config() const { return cfg_; }
  double q() const { return q_; }
  bool classical() const { return alg_.scalars().qIsOne(); }

  int defaultTruncation(const Elem& x) const {
    return cfg_.truncation > 0 ? cfg_.truncation : std::max(100, 10 * x.degree());
  }

  // pi_theta(m) e_n = entry * e_{n + aExp}
  Complex monomialEntry(const Monomial& m, int n, double theta) const {
    int target = n + m.aExp;
    if (target < 0) return 0;
    double v = std::pow(q_, static_cast<double>(n) * (m.bExp + m.bStarExp));
    for (int j = 0; j < std::abs(m.aExp); ++j) {
      int level = m.aExp > 0 ? n + j + 1 : n - j;
      v *= std::sqrt(-std::expm1(2.0 * level * std::log(q_)));
    }
    return std::polar(v, theta * (m.bExp - m.bStarExp));
  }

  // compression of pi_theta(x) to the first M basis vectors
  CSparse representElement(const Elem& x, int M, double theta = 0) const {
    return representRect(x, M, M, theta);
  }

  // rows x cols block of pi_theta(x)
  CSparse representRect(const Elem& x, int rows, int cols, double theta = 0) const {
    if (classical()) throw std::logic_error("no shift model at q = 1");
    std::vector<Eigen::Triplet<Complex>> trip;
    for (const auto& [m, c] : x.terms()) {
      Complex cc = c.toComplex();
      for (int n = 0; n < cols; ++n) {
        int r = n + m.aExp;
        if (r < 0 || r >= rows) continue;
        Complex e = monomialEntry(m, n, theta);
        if (e != Complex(0)) trip.emplace_back(r, n, cc * e);
      }
    }
    CSparse out(rows, cols);
    out.setFromTriplets(trip.begin(), trip.end());
    out.makeCompressed();
    return out;
  }

  // 2M x 2M block matrix of a row-major 2x2 array of elements
  CSparse representBlock(const std::array<Elem, 4>& entries, int M, double theta = 0) const {
    std::vector<Eigen::Triplet<Complex>> trip;
    for (int blk = 0; blk < 4; ++blk) {
      CSparse m = representElement(entries[blk], M, theta);
      int r0 = (blk / 2) * M, c0 = (blk % 2) * M;
      for (int k = 0; k < m.outerSize(); ++k)
        for (CSparse::InnerIterator it(m, k); it; ++it) trip.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
    }
    CSparse out(2 * M, 2 * M);
    out.setFromTriplets(trip.begin(), trip.end());
    out.makeCompressed();
    return out;
  }

  static double coefficientSum(const Elem& x) {
    double s = 0;
    for (const auto& [m, c] : x.terms()) s += c.magnitude();
    return s;
  }

  // ||[[x_ij]]|| <= || [[ ||x_ij|| ]] ||_2 with each ||x_ij|| bounded by its coefficient sum
  static double blockUpperBound(const std::array<Elem, 4>& e) {
    Eigen::Matrix2d m;
    m << coefficientSum(e[0]), coefficientSum(e[1]), coefficientSum(e[2]), coefficientSum(e[3]);
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(m);
    return svd.singularValues()(0);
  }

  NormEstimate operatorNorm(const Elem& x, int M = 0, int thetaGrid = 0) const {
    if (M <= 0) M = defaultTruncation(x);
    if (thetaGrid <= 0) thetaGrid = cfg_.thetaGrid;
    NormEstimate est;
    est.upperBound = coefficientSum(x);
    if (classical()) return classicalNorm([&](Complex al, Complex be) {
      Eigen::Matrix<Complex, 1, 1> v;
      v(0) = evaluate(x, al, be);
      return v;
    }, isHomogeneous(x), est);
    auto thetas = thetaValues(isHomogeneous(x) ? 1 : thetaGrid);
    est.thetaGridSize = static_cast<int>(thetas.size());
    ladder(est, M, [&](int m, std::vector<double>& perTheta) {
      double best = 0;
      for (double th : thetas) {
        auto pair = dominantSingularPair(representElement(x, m, th), cfg_.solver);
        est.solverConverged = est.solverConverged && pair.converged;
        perTheta.push_back(pair.sigma);
        best = std::max(best, pair.sigma);
      }
      return best;
    });
    return est;
  }

  // ||delta(x)|| for x in the sphere subalgebra
  LipResult<S> lipNorm(const Elem& x, int M = 0) const {
    LipResult<S> out;
    out.components = actions_.deltaMatrix(x);
    if (M <= 0) M = defaultTruncation(x);
    NormEstimate& est = out.value;
    est.upperBound = blockUpperBound(out.components);
    if (classical()) {
      classicalNorm([&](Complex al, Complex be) {
        Eigen::Matrix2cd v;
        v << evaluate(out.components[0], al, be), evaluate(out.components[1], al, be),
            evaluate(out.components[2], al, be), evaluate(out.components[3], al, be);
        return v;
      }, true, est);
      return out;
    }
    ladder(est, M, [&](int m, std::vector<double>& perTheta) {
      auto pair = dominantSingularPair(representBlock(out.components, m), cfg_.solver);
      est.solverConverged = est.solverConverged && pair.converged;
      perTheta.push_back(pair.sigma);
      return pair.sigma;
    });
    return out;
  }

  // max(||d_1(x)||, ||d_2(x)||) computed on H_+ and H_- directly.  The
  // rightDegree +-1 sectors of L^2(h) are realized as Hilbert-Schmidt operators
  // Y D^{1/2}, D = diag(atom weights).  Level M keeps vectors whose rows live on
  // atoms < M; the image under the Dirac symbol is kept in full (finite band),
  // so the level-M value is || pi(s) P_M || and increases with M.
  NormEstimate lipNormGramOracle(const Elem& x, int M = 0) const {
    auto [s1, s2] = actions_.diracComponents(x);
    if (M <= 0) M = defaultTruncation(x);
    NormEstimate est;
    est.upperBound = std::max(coefficientSum(s1), coefficientSum(s2));
    if (classical()) {
      // Gauss-Legendre nodes in t = |b|^2 replace the atoms
      double best = 0;
      int g = cfg_.classicalGrid;
      auto [nodes, weights] = gaussLegendre(g);
      for (double t : nodes)
        for (int k = 0; k < g; ++k) {
          double phi = 2 * std::numbers::pi * k / g;
          Complex al = std::sqrt(1 - t), be = std::polar(std::sqrt(t), phi);
          best = std::max({best, std::abs(evaluate(s1, al, be)), std::abs(evaluate(s2, al, be))});
        }
      est.lowerBound = best;
      est.converged = true;
      est.mUsed = g;
      return est;
    }
    int band = std::max(s1.degree(), s2.degree());
    ladder(est, M, [&](int m, std::vector<double>& perTheta) {
      double best = 0;
      for (const Elem* s : {&s1, &s2}) {
        CSparse mult = representRect(*s, m + band, m);
        // The Gram matrix is diag(atom weights) on both sides; left multiplication
        // leaves the weighted index alone, so the weights cancel in the quotient.
        auto pair = dominantSingularPair(mult, cfg_.solver);
        est.solverConverged = est.solverConverged && pair.converged;
        perTheta.push_back(pair.sigma);
        best = std::max(best, pair.sigma);
      }
      return best;
    });
    return est;
  }

  // value of x at the point (a, b) = (alpha, beta) of SU(2)
  static Complex evaluate(const Elem& x, Complex al, Complex be) {
    Complex s = 0;
    for (const auto& [m, c] : x.terms()) {
      Complex t = c.toComplex();
      Complex ap = m.aExp >= 0 ? al : std::conj(al);
      for (int i = 0; i < std::abs(m.aExp); ++i) t *= ap;
      for (int i = 0; i < m.bExp; ++i) t *= be;
      for (int i = 0; i < m.bStarExp; ++i) t *= std::conj(be);
      s += t;
    }
    return s;
  }

  static std::pair<std::vector<double>, std::vector<double>> gaussLegendre(int n) {
    // Golub-Welsch on [0, 1]
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = k / std::sqrt(4.0 * k * k - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    std::vector<double> x(n), w(n);
    for (int k = 0; k < n; ++k) {
      x[k] = (es.eigenvalues()(k) + 1) / 2;
      w[k] = es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
    }
    return {x, w};
  }

 private:
  static bool isHomogeneous(const Element<S>& x) {
    std::optional<int> deg;
    for (const auto& [m, c] : x.terms()) {
      if (deg && *deg != m.rightDegree()) return false;
      deg = m.rightDegree();
    }
    return true;
  }

  static std::vector<double> thetaValues(int g) {
    std::vector<double> t;
    for (int k = 0; k < g; ++k) t.push_back(2 * std::numbers::pi * k / g);
    return t;
  }

  template <class F>
  void ladder(NormEstimate& est, int M, F&& evalAt) const {
    double prev = -1;
    int m = M;
    for (int step = 0; step <= cfg_.doublings; ++step, m *= 2) {
      std::vector<double> perTheta;
      double v = evalAt(m, perTheta);
      est.mLadder.push_back(m);
      est.ladderValues.push_back(v);
      est.perTheta = std::move(perTheta);
      est.lowerBound = std::max(est.lowerBound, v);
      est.mUsed = m;
      if (prev >= 0 && std::abs(v - prev) <= cfg_.relTol * std::max(v, 1e-300)) {
        est.converged = true;
        break;
      }
      if (prev >= 0 && v == 0 && prev == 0) {
        est.converged = true;
        break;
      }
      prev = v;
    }
    clampToBound(est);
  }

  // grid maximum over points of SU(2); sphere elements only see the polar angle
  // and the relative phase
  template <class F>
  NormEstimate& classicalNorm(F&& valueAt, bool reduced, NormEstimate& est) const {
    auto run = [&](int g) {
      double best = 0;
      int gPhi2 = reduced ? 1 : g;
      for (int i = 0; i <= g; ++i) {
        double eta = std::numbers::pi / 2 * i / g;
        for (int j = 0; j < g; ++j)
          for (int k = 0; k < gPhi2; ++k) {
            Complex al = std::polar(std::cos(eta), 2 * std::numbers::pi * j / g);
            Complex be = std::polar(std::sin(eta), 2 * std::numbers::pi * k / g);
            auto v = valueAt(al, be);
            double n = v.size() == 1 ? std::abs(v(0, 0)) : Eigen::JacobiSVD<decltype(v)>(v).singularValues()(0);
            best = std::max(best, n);
          }
      }
      return best;
    };
    int g = cfg_.classicalGrid;
    double coarse = run(g / 2), fine = run(g);
    est.mLadder = {g / 2, g};
    est.ladderValues = {coarse, fine};
    est.lowerBound = std::max(coarse, fine);
    est.mUsed = g;
    // grid-resolution limited: converged means the refinement moved less than 1e-3
    est.converged = std::abs(fine - coarse) <= 1e-3 * std::max(1.0, fine);
    clampToBound(est);
    return est;
  }

  // the upper bound is rigorous, so solver noise above it is rounded back down
  static void clampToBound(NormEstimate& est) {
    if (est.lowerBound > est.upperBound && est.lowerBound - est.upperBound <= 1e-12 * est.upperBound)
      est.lowerBound = est.upperBound;
  }

  const UqActions<S>& actions_;
  const Algebra<S>& alg_;
  NormConfig cfg_;
  double q_;
};

}  // namespace qsphere
