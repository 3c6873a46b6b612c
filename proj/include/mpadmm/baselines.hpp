#pragma once

// Reference matrix-completion methods: Iterative-SVD, Soft-Impute, ScaledGD.

#include <optional>
#include <vector>

#include "mpadmm/linalg.hpp"
#include "mpadmm/model.hpp"

namespace mpadmm {

enum class StopReason { converged, max_iters };

const char* to_string(StopReason r);

struct BaselineResult {
  /// Dense estimate (Iterative-SVD, Soft-Impute). Empty when factored.
  Matrix X_hat;
  /// Factors with X_hat = U V^T (ScaledGD). Empty when dense.
  Matrix U;
  Matrix V;
  int iterations = 0;
  double wall_ms = 0.0;
  StopReason termination = StopReason::max_iters;
  /// ScaledGD: a Gram matrix needed the ridge fallback at least once.
  bool ridge_used = false;
  /// ScaledGD: iterations where the loss went up by more than 1e-9 relative.
  int monotone_violations = 0;
  /// Per-iteration loss (ScaledGD) or relative change (the others).
  std::vector<double> trace;

  bool factored() const { return X_hat.size() == 0; }
  /// X_hat, forming U V^T when factored.
  Matrix dense() const;
};

struct IterativeSvdOptions {
  int max_iters = 500;
  /// Stop when ||X_{t+1} - X_t||_F over the missing entries is below this.
  double tol = 0.01;
};

/// Row-mean initialization (global observed mean for empty rows), then
/// alternate a rank-k SVD with leave-one-out regressions for missing entries.
BaselineResult iterative_svd(const PartialMatrix& data, Index k,
                             const IterativeSvdOptions& options = {});

struct SoftImputeOptions {
  /// Shrinkage; defaults to sigma_1(zero-filled A) / 50.
  std::optional<double> tau;
  double eps = 1e-4;
  /// Keep at most this many singular values; 0 means no cap.
  Index k_cap = 0;
  int max_iters = 100;
};

/// Z <- S_tau(P_Omega(A) + P_Omega^perp(Z)) from Z = 0 until the relative
/// squared change drops below eps.
BaselineResult soft_impute(const PartialMatrix& data, const SoftImputeOptions& options = {});

/// Default Soft-Impute shrinkage for the data.
double soft_impute_default_tau(const PartialMatrix& data);

struct ScaledGdOptions {
  int max_iters = 1000;
  /// Stop when the relative loss improvement falls below this.
  double rel_tol = 1e-3;
  /// Step size; defaults to 1 / (10 sigma_1(zero-filled A)).
  std::optional<double> eta;
  std::uint64_t seed = 0;
};

/// L(U, V) = sum_Omega ((U V^T)_ij - A_ij)^2 + lambda ||Y - U V^T alpha||_F^2
///           + gamma / 2 (||U||_F^2 + ||V||_F^2) at fixed alpha.
double scaled_gd_loss(const Matrix& U, const Matrix& V, const Matrix& alpha,
                      const PartialMatrix& data, const Matrix& Y, double lambda, double gamma);

struct FactorGradient {
  Matrix dU;
  Matrix dV;
};

/// Gradient of scaled_gd_loss in U and V with alpha held fixed.
FactorGradient scaled_gd_gradient(const Matrix& U, const Matrix& V, const Matrix& alpha,
                                  const PartialMatrix& data, const Matrix& Y, double lambda,
                                  double gamma);

/// Preconditioned gradient steps U -= eta dU (V^T V)^-1, V -= eta dV (U^T U)^-1
/// with alpha refit by least squares before every step. Spectral start.
BaselineResult scaled_gd(const PartialMatrix& data, const Matrix& Y, double lambda, double gamma,
                         Index k, const ScaledGdOptions& options = {});

}  // namespace mpadmm
