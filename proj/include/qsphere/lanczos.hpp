#pragma once

// Largest singular value of a sparse complex matrix via restarted Lanczos on
// X^H X with full reorthogonalization.  Small problems go straight to a dense
// eigensolver, and so do mid-sized ones where restarting stalls on a cluster at
// the top of the spectrum.

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <cstdint>
#include <random>

namespace qsphere {

using Complex = std::complex<double>;
using CSparse = Eigen::SparseMatrix<Complex>;

struct SingularPair {
  double sigma = 0;
  Eigen::VectorXcd left, right;  // X right = sigma left
  int matvecs = 0;
  bool converged = true;
};

struct LanczosOptions {
  double tol = 1e-12;  // relative residual of the top eigenpair of X^H X
  int maxMatvecs = 100000;
  int blockSize = 60;  // Krylov steps between restarts
  int denseBelow = 48;
  int denseFallback = 1600;   // dimension up to which a stalled run is finished densely
  int fallbackMatvecs = 1200;
  std::uint64_t seed = 0x5eed;
};

inline SingularPair dominantSingularPair(const CSparse& X, const LanczosOptions& opt = {}) {
  SingularPair out;
  const Eigen::Index n = X.cols();
  if (n == 0 || X.nonZeros() == 0) {
    out.right = Eigen::VectorXcd::Zero(n);
    out.left = Eigen::VectorXcd::Zero(X.rows());
    if (n > 0) out.right(0) = 1;
    return out;
  }
  auto finish = [&](Eigen::VectorXcd v) {
    v.normalize();
    Eigen::VectorXcd xv = X * v;
    out.sigma = xv.norm();
    out.right = std::move(v);
    out.left = out.sigma > 0 ? Eigen::VectorXcd(xv / out.sigma) : Eigen::VectorXcd::Zero(X.rows());
  };

  auto dense = [&] {
    Eigen::MatrixXcd g = Eigen::MatrixXcd(X.adjoint() * X);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(g);
    finish(es.eigenvectors().col(n - 1));
    out.converged = true;
    return out;
  };
  if (n <= opt.denseBelow) return dense();

  // all-ones start with a small seeded perturbation so no symmetry can hide the top vector
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> jitter(-1e-3, 1e-3);
  Eigen::VectorXcd start(n);
  for (Eigen::Index i = 0; i < n; ++i) start(i) = Complex(1.0 + jitter(rng), jitter(rng));
  start.normalize();

  auto apply = [&](const Eigen::VectorXcd& v) {
    ++out.matvecs;
    Eigen::VectorXcd xv = X * v;
    return Eigen::VectorXcd(X.adjoint() * xv);
  };

  const int m = static_cast<int>(std::min<Eigen::Index>(opt.blockSize, n));
  Eigen::MatrixXcd V(n, m + 1);
  double theta = 0;
  out.converged = false;
  const int budget = n <= opt.denseFallback ? std::min(opt.maxMatvecs, opt.fallbackMatvecs) : opt.maxMatvecs;
  while (out.matvecs < budget) {
    V.col(0) = start;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    int steps = 0;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXcd w = apply(V.col(j));
      // two passes of classical Gram-Schmidt against the whole Krylov basis
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXcd c = V.leftCols(j + 1).adjoint() * w;
        w -= V.leftCols(j + 1) * c;
        if (pass == 0) T(j, j) = c(j).real();
        else T(j, j) += c(j).real();
      }
      steps = j + 1;
      double beta = w.norm();
      if (j + 1 < m) {
        T(j, j + 1) = T(j + 1, j) = beta;
      }
      if (beta <= 1e-14 * std::max(1.0, std::abs(T(j, j)))) break;
      V.col(j + 1) = w / beta;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T.topLeftCorner(steps, steps));
    theta = es.eigenvalues()(steps - 1);
    Eigen::VectorXcd ritz = V.leftCols(steps) * es.eigenvectors().col(steps - 1).cast<Complex>();
    ritz.normalize();
    Eigen::VectorXcd residual = apply(ritz) - theta * ritz;
    start = ritz;
    if (residual.norm() <= opt.tol * std::max(theta, 1e-300)) {
      out.converged = true;
      break;
    }
    if (theta <= 0) {
      out.converged = true;
      break;
    }
  }
  if (!out.converged && n <= opt.denseFallback) return dense();
  finish(start);
  return out;
}

}  // namespace qsphere
