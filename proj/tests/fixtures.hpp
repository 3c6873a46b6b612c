#pragma once

// Small random problems and dense reference formulas shared by the unit
// tests and the acceptance binary.

#include <vector>

#include "mpadmm/admm.hpp"
#include "mpadmm/model.hpp"
#include "oracles.hpp"

namespace fixture {

using mpadmm::Entry;
using mpadmm::Index;
using mpadmm::Matrix;
using mpadmm::PartialMatrix;

struct Problem {
  PartialMatrix data;
  Matrix A;     // dense, zeros where unobserved
  Matrix mask;  // 1 where observed
  Matrix Y;
};

/// Random observed pattern with roughly obs_frac of entries observed.
inline Problem random_problem(oracle::Rng& rng, Index n, Index m, Index d, double obs_frac) {
  Problem p;
  p.A = Matrix::Zero(n, m);
  p.mask = Matrix::Zero(n, m);
  std::vector<Entry> entries;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (rng.uniform() < obs_frac) {
        const double v = rng.normal();
        entries.push_back({i, j, v});
        p.A(i, j) = v;
        p.mask(i, j) = 1.0;
      }
    }
  }
  p.data = PartialMatrix(n, m, entries);
  p.Y = rng.gaussian(n, d);
  return p;
}

/// Augmented Lagrangian assembled densely with P = M M^T.
inline double dense_lagrangian(const Problem& p, const mpadmm::IterateState& s, double lambda,
                               double gamma, double rho1, double rho2) {
  const Index n = s.U.rows();
  const Matrix P = s.M * s.M.transpose();
  const Matrix I = Matrix::Identity(n, n);
  const Matrix X = s.U * s.V.transpose();
  const double fit = (p.mask.array() * (X - p.A).array()).square().sum();
  const Matrix IP = I - P;
  const double side = lambda * (IP * p.Y).squaredNorm();
  const double reg = 0.5 * gamma * (s.U.squaredNorm() + s.V.squaredNorm());
  const Matrix r1 = IP * s.Z;
  const Matrix r2 = s.Z - s.U;
  return fit + side + reg + (s.Phi.array() * r1.array()).sum() +
         (s.Psi.array() * r2.array()).sum() + 0.5 * rho1 * r1.squaredNorm() +
         0.5 * rho2 * r2.squaredNorm();
}

/// vec/unvec in column order.
inline Matrix unvec(const oracle::Vector& x, Index r, Index c) {
  return Eigen::Map<const Matrix>(x.data(), r, c);
}

/// Dense C = lambda Y Y^T + (rho1/2) Z Z^T + (Phi Z^T + Z Phi^T)/2.
inline Matrix dense_pgram(const Matrix& Y, const Matrix& Z, const Matrix& Phi, double lambda,
                          double rho1) {
  return lambda * Y * Y.transpose() + 0.5 * rho1 * Z * Z.transpose() +
         0.5 * (Phi * Z.transpose() + Z * Phi.transpose());
}

}  // namespace fixture
