#pragma once

// Berezin transform beta_N = (1 (x) h_N) Delta on the sphere subalgebra, where
//   h_N(x) = <N+1> h(as^N x a^N),  <N+1> = 1 + q^2 + ... + q^{2N},
// computed from the coproduct and again from its spin-layer eigenvalues.

#include "qsphere/gns.hpp"
#include "qsphere/specnorm.hpp"

namespace qsphere {

struct SpectrumInconsistency : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class S>
struct BerezinSpectrum {
  int level = 0;
  std::vector<S> eigenvalues;  // index = spin, up to the requested max spin

  S at(int spin) const {
    if (spin < static_cast<int>(eigenvalues.size())) return eigenvalues[spin];
    if (spin > level) return S();
    throw std::out_of_range("spin outside the computed spectrum");
  }
};

struct SliceReport {
  double lipOfSlice = 0;
  double bound = 0;  // |xi| |zeta| L(x)
  bool converged = false;
  bool holds = false;
};

template <class S>
class Berezin {
 public:
  using Elem = Element<S>;

  explicit Berezin(const Gns<S>& gns)
      : gns_(gns), act_(gns.actions()), alg_(gns.algebra()), cache_(std::make_shared<Caches>()) {}

  const Gns<S>& gns() const { return gns_; }

  // <N+1> = sum_{k=0}^N q^{2k}
  S quantumInteger(int N) const {
    S s = alg_.scalars().zero();
    for (int k = 0; k <= N; ++k) s += alg_.scalars().qpow(2 * k);
    return s;
  }

  // h_0 is taken to be h
  S hN(const Elem& x, int N) const {
    if (N < 0) throw std::invalid_argument("h_N needs N >= 0");
    S out = alg_.scalars().zero();
    for (const auto& [m, c] : x.terms()) out += hNMonomial(m, N) * c;
    return out;
  }

  Elem viaCoproduct(const Elem& x, int N) const {
    requireSphere(x);
    Elem out;
    for (const auto& [m, c] : x.terms())
      out += alg_.sliceRight(alg_.coproductMonomial(m), [&](const Monomial& r) { return hNMonomial(r, N); }) * c;
    return out;
  }

  Elem viaSpectrum(const Elem& x, int N) const {
    requireSphere(x);
    int top = sphereSpin(x);
    int reach = std::min(top, N);
    auto spec = spectrum(N, std::max(N, reach));
    Elem out, below;
    for (int n = 0; n <= reach; ++n) {
      Elem upto = gns_.phiProjection(x, n);
      out += (upto - below) * spec.at(n);
      below = std::move(upto);
    }
    return out;
  }

  // c_{N,n} from beta_N on every basis vector of spin n; the ratio must be the
  // same across the 2n+1 weights and beta_N must act diagonally.
  BerezinSpectrum<S> spectrum(int N, int maxSpin) const {
    if (maxSpin < N) throw std::invalid_argument("maxSpin must be >= N");
    {
      std::lock_guard lock(cache_->mu);
      auto it = cache_->spectra.find(N);
      if (it != cache_->spectra.end() && static_cast<int>(it->second.eigenvalues.size()) > maxSpin) {
        auto s = it->second;
        s.eigenvalues.resize(maxSpin + 1);
        return s;
      }
    }
    BerezinSpectrum<S> spec;
    spec.level = N;
    const auto& basis = gns_.basis(maxSpin);
    spec.eigenvalues.assign(maxSpin + 1, alg_.scalars().zero());
    std::vector<bool> seen(maxSpin + 1, false);
    for (const auto& v : basis.vectors) {
      Elem image = viaCoproduct(v.vector, N);
      S ratio = gns_.haarInner(v.vector, image) / v.normSquared;
      if (!(image == v.vector * ratio))
        throw SpectrumInconsistency("beta_N is not diagonal on the spin " + std::to_string(v.spin) +
                                    ", weight " + std::to_string(v.weight) + " vector");
      if (!seen[v.spin]) {
        spec.eigenvalues[v.spin] = ratio;
        seen[v.spin] = true;
      } else if (!(spec.eigenvalues[v.spin] == ratio)) {
        throw SpectrumInconsistency("eigenvalue differs across the weights of spin " + std::to_string(v.spin));
      }
    }
    std::lock_guard lock(cache_->mu);
    auto& slot = cache_->spectra[N];
    if (slot.eigenvalues.size() < spec.eigenvalues.size()) slot = spec;
    return spec;
  }

  // y = (phi (x) 1) Delta(x) with phi(z) = h(xi* z zeta); checks L(y) <= |xi||zeta| L(x)
  Elem slice(const Elem& x, const Elem& xi, const Elem& zeta) const {
    requireSphere(x);
    Elem out;
    Elem xiStar = alg_.involution(xi);
    for (const auto& [m, c] : x.terms())
      out += alg_.sliceLeft(alg_.coproductMonomial(m), [&](const Monomial& l) {
        return alg_.haarState(alg_.multiply(alg_.multiply(xiStar, alg_.monomial(l)), zeta));
      }) * c;
    return out;
  }

  SliceReport sliceLipCheck(const Elem& x, const Elem& xi, const Elem& zeta, const SpectralNorms<S>& norms,
                            int truncation, double relTol = 1e-4) const {
    Elem y = slice(x, xi, zeta);
    auto ly = norms.lipNorm(y, truncation).value;
    auto lx = norms.lipNorm(x, truncation).value;
    double nxi = std::sqrt(gns_.haarInner(xi, xi).toComplex().real());
    double nzeta = std::sqrt(gns_.haarInner(zeta, zeta).toComplex().real());
    SliceReport r;
    r.lipOfSlice = ly.lowerBound;
    r.bound = nxi * nzeta * lx.lowerBound;
    r.converged = ly.converged && lx.converged;
    r.holds = r.lipOfSlice <= r.bound * (1 + relTol) + 1e-12;
    return r;
  }

  // largest n with a nonzero component in spin layer n
  static int sphereSpin(const Elem& x) { return (x.degree() + 1) / 2; }

 private:
  struct Caches {
    std::mutex mu;
    std::map<std::pair<int, Monomial>, S> hN;
    std::map<int, BerezinSpectrum<S>> spectra;
  };

  S hNMonomial(const Monomial& m, int N) const {
    if (N == 0) return alg_.haarMonomial(m);
    // only weight-zero monomials survive h
    if (m.leftDegree() != 0 || m.rightDegree() != 0) return alg_.scalars().zero();
    {
      std::lock_guard lock(cache_->mu);
      auto it = cache_->hN.find({N, m});
      if (it != cache_->hN.end()) return it->second;
    }
    Elem sandwich = alg_.multiply(alg_.multiply(alg_.monomial({-N, 0, 0}), alg_.monomial(m)), alg_.monomial({N, 0, 0}));
    S v = alg_.haarState(sandwich) * quantumInteger(N);
    std::lock_guard lock(cache_->mu);
    cache_->hN.emplace(std::make_pair(N, m), v);
    return v;
  }

  void requireSphere(const Elem& x) const {
    if (!x.hasOnlyRightDegreeZero()) throw std::invalid_argument("Berezin transform needs a sphere element");
  }

  const Gns<S>& gns_;
  const UqActions<S>& act_;
  const Algebra<S>& alg_;
  std::shared_ptr<Caches> cache_;
};

}  // namespace qsphere
