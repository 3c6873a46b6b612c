#pragma once

// Evaluation of
//   f(X) = sum_Omega (X_ij - A_ij)^2 + lambda ||Y - X alpha*||_F^2 + gamma ||X||_*
// with alpha* the least-squares regression of Y on X, plus the metrics
// reported by the benchmark.

#include "mpadmm/linalg.hpp"
#include "mpadmm/model.hpp"

namespace mpadmm {

struct ObjectiveBreakdown {
  double fit_term = 0.0;
  double side_term = 0.0;
  double reg_term = 0.0;
  double total = 0.0;
};

/// alpha* = (X^T X)^+ X^T Y; singular values below sigma_1 * 1e-12 are dropped.
Matrix ols_alpha(const Matrix& X, const Matrix& Y);

/// ols_alpha for X = Uf Vf^T through the compact SVD of the factors.
Matrix ols_alpha_factored(const Matrix& Uf, const Matrix& Vf, const Matrix& Y);

/// Objective at fixed alpha (before partial minimization).
double objective_at_alpha(const Matrix& X, const Matrix& alpha, const PartialMatrix& data,
                          const Matrix& Y, double lambda, double gamma);

/// Reference evaluation through an explicit (X^T X)^+. Cubic in m; meant as
/// an oracle for small inputs.
ObjectiveBreakdown objective_naive(const Matrix& X, const PartialMatrix& data, const Matrix& Y,
                                   double lambda, double gamma);

/// Side term from the compact SVD X = U S V^T: lambda ||(I - U U^T) Y||_F^2.
ObjectiveBreakdown objective_svd(const Matrix& X, const PartialMatrix& data, const Matrix& Y,
                                 double lambda, double gamma);

/// Same for X = Uf Vf^T without forming X. O(k n (m + d)).
ObjectiveBreakdown objective_svd_factored(const Matrix& Uf, const Matrix& Vf,
                                          const PartialMatrix& data, const Matrix& Y,
                                          double lambda, double gamma);

/// (sum_Omega A_ij^2 + lambda ||Y||_F^2) / gamma.
double spectral_bound(const PartialMatrix& data, const Matrix& Y, double lambda, double gamma);

struct WorstCase {
  Matrix Delta;  ///< gamma U V^T from the compact SVD of X
  double inner = 0.0;
};

/// Maximizer of <X, Delta> over the spectral-norm ball of radius gamma.
WorstCase worst_case_delta(const Matrix& X, double gamma);

/// ||X_hat - A||_F^2 / ||A||_F^2.
double err_l2(const Matrix& X_hat, const Matrix& A_true);

/// Pooled R^2 of regressing Y on X_hat, column-centered total sum of squares.
double r_squared(const Matrix& X_hat, const Matrix& Y);
double r_squared_factored(const Matrix& Uf, const Matrix& Vf, const Matrix& Y);

/// Count of singular values above sigma_1 * max(n, m) * 2^-52.
Index fitted_rank(const Matrix& X_hat);
Index fitted_rank_factored(const Matrix& Uf, const Matrix& Vf);

struct Metrics {
  double err_l2 = 0.0;
  double r2 = 0.0;
  Index fitted_rank = 0;
  ObjectiveBreakdown objective;
};

/// All metrics for X_hat = Uf Vf^T. err_l2 is skipped (NaN) when A_true is empty.
Metrics evaluate_factored(const Matrix& Uf, const Matrix& Vf, const PartialMatrix& data,
                          const Matrix& Y, const Matrix& A_true, double lambda, double gamma);

Metrics evaluate_dense(const Matrix& X_hat, const PartialMatrix& data, const Matrix& Y,
                       const Matrix& A_true, double lambda, double gamma);

}  // namespace mpadmm
