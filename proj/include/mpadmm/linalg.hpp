#pragma once

// Dense and implicit-operator linear algebra used by the solver, the baselines
// and the objective evaluators. Dense storage is Eigen; everything that only
// needs products goes through LinearMap so that n x n operators are never
// materialized.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>

#include "mpadmm/errors.hpp"

namespace mpadmm::linalg {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Machine epsilon used by the numerical-rank convention (2^-52).
inline constexpr double kRankEps = 0x1.0p-52;

/// A linear operator known only through products with blocks of vectors.
class LinearMap {
 public:
  /// Maps a (cols x b) block to a (rows x b) block, or the transpose.
  using BlockFn = std::function<Matrix(const Matrix&)>;

  LinearMap(Index rows, Index cols, BlockFn apply, BlockFn apply_transpose);

  /// Wraps a dense matrix (copied into shared storage).
  static LinearMap from_dense(Matrix a);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  Matrix apply(const Matrix& x) const;
  Matrix apply_transpose(const Matrix& x) const;
  Vector matvec(const Vector& x) const;
  Vector rmatvec(const Vector& x) const;

  /// Materializes the operator. Intended for tests and tiny operators.
  Matrix to_dense() const;

 private:
  Index rows_;
  Index cols_;
  BlockFn apply_;
  BlockFn apply_transpose_;
};

/// Leading singular triplets: U (n x k), S (k, non-increasing), V (m x k).
struct TruncatedSVD {
  Matrix U;
  Vector S;
  Matrix V;
};

/// Leading eigenpairs by algebraic value: vectors (n x k), values non-increasing.
struct SymmetricEig {
  Matrix vectors;
  Vector values;
};

struct SpectralOptions {
  /// Relative accuracy: residual of each returned pair must be <= tol * scale,
  /// where scale is sigma_1 (SVD) or max |lambda| (eig).
  double tol = 1e-10;
  std::uint64_t seed = 0x5eed;
  Index oversample = 10;
  int power_iters = 4;
  /// Total budget of power iterations / Krylov blocks.
  int max_iters = 300;
  /// Operators whose smaller dimension is <= this use a dense decomposition.
  Index dense_cutoff = 32;
};

class SvdConvergenceError : public ConvergenceError {
 public:
  SvdConvergenceError(TruncatedSVD best, double residual);
  const TruncatedSVD& best() const { return best_; }
  double residual() const { return residual_; }

 private:
  TruncatedSVD best_;
  double residual_;
};

class EigConvergenceError : public ConvergenceError {
 public:
  EigConvergenceError(SymmetricEig best, double residual);
  const SymmetricEig& best() const { return best_; }
  double residual() const { return residual_; }

 private:
  SymmetricEig best_;
  double residual_;
};

/// Rank-k truncated SVD by block randomized subspace iteration (dense
/// decomposition below the cutoff). Deterministic for a fixed seed.
TruncatedSVD truncated_svd(const LinearMap& op, Index k,
                           const SpectralOptions& options = {});

/// Top-k eigenpairs of a symmetric operator, ordered by algebraic value.
/// Uses a randomized block Krylov space so both ends of the spectrum are
/// captured; the k largest Ritz pairs are returned.
SymmetricEig symmetric_eig_topk(const LinearMap& op, Index k,
                                const SpectralOptions& options = {});

/// Top-k algebraic eigenpairs of a symmetric operator whose range lies in
/// span(range). Rayleigh-Ritz on that span is exact; eigenvalue 0 of the
/// orthogonal complement is included in the ordering when needed.
/// Throws ParameterError if span(range) is not invariant under op.
SymmetricEig symmetric_eig_topk_in_range(const LinearMap& op, const Matrix& range,
                                         Index k);

/// Column blocks F1, F2 with F1 * F2^T = lambda Y Y^T + (rho1/2) Z Z^T
/// + (Phi Z^T + Z Phi^T) / 2.
struct PgramFactors {
  Matrix F1;
  Matrix F2;
};

PgramFactors pgram_factors(const Matrix& Y, const Matrix& Z, const Matrix& Phi,
                           double lambda, double rho1);

/// x -> F1 (F2^T x). Costs O(n (d + k)) per vector; never forms an n x n matrix.
LinearMap build_pgram_operator(const Matrix& Y, const Matrix& Z, const Matrix& Phi,
                               double lambda, double rho1);

/// Same map over precomputed factors, shared rather than copied.
LinearMap pgram_operator(std::shared_ptr<const PgramFactors> factors);

/// sum_i max(sigma_i - tau, 0) u_i v_i^T over the leading max_rank terms.
Matrix soft_threshold_svd(const Matrix& X, double tau,
                          std::optional<Index> max_rank = std::nullopt);

/// M (M^T R) for M with orthonormal columns (checked to 1e-6).
Matrix apply_projection(const Matrix& M, const Matrix& R);

/// Max-abs deviation of M^T M from the identity.
double orthonormality_error(const Matrix& M);

/// Orthonormal basis of col(A). Columns whose pivoted-QR diagonal falls below
/// rel_tol * |R_00| are dropped. Zero matrix -> n x 0 result.
Matrix orthonormal_basis(const Matrix& A, double rel_tol = 1e-12);

/// Compact SVD at numerical rank: sigma_i > sigma_1 * max(n, m) * 2^-52.
TruncatedSVD compact_svd(const Matrix& X);

/// Compact SVD of X = Uf Vf^T without forming X; O(k^2 (n + m)).
TruncatedSVD compact_svd_factored(const Matrix& Uf, const Matrix& Vf);

/// Singular-value threshold of the numerical-rank convention.
double rank_tolerance(Index rows, Index cols, double sigma1);

/// Flips columns so that the first nonzero entry of each is nonnegative.
/// When partner is given its matching columns are flipped too.
void normalize_signs(Matrix& vectors, Matrix* partner = nullptr);

/// ||A A^T - B B^T||_F for matrices with orthonormal columns.
double projector_distance(const Matrix& A, const Matrix& B);

/// Moore-Penrose pseudo-inverse; singular values below sigma_1 * rel_cutoff
/// are treated as zero.
Matrix pseudo_inverse(const Matrix& A, double rel_cutoff);

/// True when every entry is finite.
bool all_finite(const Matrix& A);

}  // namespace mpadmm::linalg
