#pragma once

// Mixed-projection ADMM for
//   min sum_Omega (X_ij - A_ij)^2 + lambda ||Y - X alpha||_F^2 + gamma ||X||_*
//   s.t. rank(X) <= k
// in the split form X = U V^T, U = Z, Z = P Z with P = M M^T a rank-k
// projector. Duals Phi (for (I - P) Z = 0) and Psi (for Z - U = 0).

#include <functional>
#include <vector>

#include "mpadmm/linalg.hpp"
#include "mpadmm/model.hpp"
#include "mpadmm/thread_pool.hpp"
#include "mpadmm/timers.hpp"

namespace mpadmm {

struct IterateState {
  Matrix U;    ///< n x k
  Matrix V;    ///< m x k
  Matrix M;    ///< n x k, orthonormal columns, P = M M^T
  Matrix Z;    ///< n x k
  Matrix Phi;  ///< n x k
  Matrix Psi;  ///< n x k
};

enum class Termination { tolerance_met, max_iters };

const char* to_string(Termination t);

struct SolveReport {
  int iterations = 0;
  std::vector<double> phi_residual_trace;   ///< ||(I - P) Z||_F per iteration
  std::vector<double> psi_residual_trace;   ///< ||Z - U||_F
  std::vector<double> dual_residual_trace;  ///< ||P2 - P1 P2||_F (empty when not tracked)
  std::vector<double> objective_trace;      ///< objective at X = U V^T (empty when not tracked)
  SubproblemTimes times;
  double total_ms = 0.0;
  Termination termination = Termination::max_iters;
  /// Set when Z had rank below k while computing a dual residual.
  bool rank_deficient_warning = false;
};

/// Observed entries grouped by row and by column (CSR and CSC).
class ObservationMasks {
 public:
  explicit ObservationMasks(const PartialMatrix& data);

  Index rows() const { return static_cast<Index>(row_ptr_.size()) - 1; }
  Index cols() const { return static_cast<Index>(col_ptr_.size()) - 1; }
  std::size_t nnz() const { return row_idx_.size(); }

  /// Observed columns of row i and their values: [row_begin(i), row_begin(i + 1)).
  std::size_t row_begin(Index i) const { return row_ptr_[i]; }
  Index row_col(std::size_t t) const { return row_idx_[t]; }
  double row_value(std::size_t t) const { return row_val_[t]; }

  std::size_t col_begin(Index j) const { return col_ptr_[j]; }
  Index col_row(std::size_t t) const { return col_idx_[t]; }
  double col_value(std::size_t t) const { return col_val_[t]; }

 private:
  std::vector<std::size_t> row_ptr_;
  std::vector<Index> row_idx_;
  std::vector<double> row_val_;
  std::vector<std::size_t> col_ptr_;
  std::vector<Index> col_idx_;
  std::vector<double> col_val_;
};

/// Row i: [2 V^T W_i V + (gamma + rho2) I] U_i = 2 V^T W_i A_i + Psi_i + rho2 Z_i.
/// Rows are distributed over the pool; each row is solved sequentially.
Matrix update_U(const Matrix& V, const Matrix& Z, const Matrix& Psi, const ObservationMasks& masks,
                double gamma, double rho2, ThreadPool* pool = nullptr);

/// Row j: [2 U^T W_j U + gamma I] V_j = 2 U^T W_j A_j.
Matrix update_V(const Matrix& U, const ObservationMasks& masks, double gamma,
                ThreadPool* pool = nullptr);

struct PUpdate {
  Matrix M;                ///< n x k orthonormal
  linalg::Vector values;   ///< selected eigenvalues, non-increasing
};

/// Top-k algebraic eigenvectors of
///   lambda Y Y^T + (rho1 / 2) Z Z^T + (Phi Z^T + Z Phi^T) / 2,
/// applied only through its n x (d + 3k) factors.
PUpdate update_P(const Matrix& Y, const Matrix& Z, const Matrix& Phi, double lambda, double rho1,
                 Index k);

/// Closed-form minimizer over Z with P = M M^T applied in factored form.
Matrix update_Z(const Matrix& U, const Matrix& M, const Matrix& Phi, const Matrix& Psi,
                double rho1, double rho2);

/// Phi += rho1 (I - P) Z, Psi += rho2 (Z - U).
void update_duals(IterateState& state, double rho1, double rho2);

/// ||(I - P) Z||_F and ||Z - U||_F.
double phi_residual(const IterateState& state);
double psi_residual(const IterateState& state);

/// Augmented Lagrangian at the given state.
double augmented_lagrangian(const IterateState& state, const ObservationMasks& masks,
                            const Matrix& Y, const Hyperparams& hp);

struct DualResidual {
  double value = 0.0;
  bool rank_deficient = false;  ///< rank(Z) < k; P1 built at the actual rank
};

/// ||P2 - P1 P2||_F = ||(I - P1) M2||_F with P1 onto col(Z) and P2 onto the
/// top-k eigenvectors of lambda Y Y^T + (Phi Z^T + Z Phi^T) / 2.
DualResidual dual_residual(const IterateState& state, const Matrix& Y, double lambda);

struct FirstOrderReport {
  double residual[6] = {0, 0, 0, 0, 0, 0};  ///< U, V, P, Phi + Psi = P Phi, Z = P Z, Z = U
  bool holds[6] = {false, false, false, false, false, false};

  bool all() const;
};

/// Residual norms of the stationarity conditions of the (unaugmented)
/// Lagrangian. The P condition is measured as a projector distance.
FirstOrderReport first_order_check(const IterateState& state, const ObservationMasks& masks,
                                   const Matrix& Y, double lambda, double gamma, double tol);

enum class Block { init, U, P, V, Z, duals };

struct SolveOptions {
  bool track_objective = true;
  bool track_dual_residual = true;
  /// Called after initialization and after every block update.
  std::function<void(Block, const IterateState&, int iteration)> observer;
};

/// Rank-k truncated SVD of zero-filled A: U = Z = L S^1/2, M = L, V = R S^1/2,
/// Phi = Psi = ones.
IterateState initial_state(const PartialMatrix& data, Index k, std::uint64_t seed);

struct SolveResult {
  IterateState state;
  SolveReport report;
};

/// Runs at least one iteration, then stops once
/// max(||(I - P) Z||^2, ||Z - U||^2) <= eps or after max_iter iterations.
SolveResult solve(const PartialMatrix& data, const Matrix& Y, const Hyperparams& hp,
                  const SolveOptions& options = {});

}  // namespace mpadmm
