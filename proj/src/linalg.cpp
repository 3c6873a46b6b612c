#include "mpadmm/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mpadmm/rng.hpp"

namespace mpadmm::linalg {

namespace {

Matrix gaussian_block(Index rows, Index cols, std::uint64_t seed) {
  Xoshiro256 rng(seed);
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

// Thin Q of an unpivoted Householder QR. Always has x.cols() orthonormal
// columns, even when x is rank deficient.
Matrix thin_q(const Matrix& x) {
  Eigen::HouseholderQR<Matrix> qr(x);
  Matrix q = Matrix::Identity(x.rows(), x.cols());
  q.applyOnTheLeft(qr.householderQ());
  return q;
}

Matrix materialize(const LinearMap& op) {
  if (op.cols() <= op.rows()) return op.apply(Matrix::Identity(op.cols(), op.cols()));
  return op.apply_transpose(Matrix::Identity(op.rows(), op.rows())).transpose();
}

TruncatedSVD dense_truncated_svd(const Matrix& a, Index k) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSVD out{svd.matrixU().leftCols(k), svd.singularValues().head(k),
                   svd.matrixV().leftCols(k)};
  normalize_signs(out.U, &out.V);
  return out;
}

void check_symmetric(const LinearMap& op, std::uint64_t seed) {
  if (op.rows() != op.cols()) {
    throw ParameterError("symmetric operator must be square, got " +
                         std::to_string(op.rows()) + "x" + std::to_string(op.cols()));
  }
  const Matrix probes = gaussian_block(op.rows(), 6, seed ^ 0xa5a5a5a5ULL);
  const Matrix images = op.apply(probes);
  for (Index p = 0; p < 3; ++p) {
    const auto v = probes.col(2 * p);
    const auto w = probes.col(2 * p + 1);
    const double lhs = images.col(2 * p).dot(w);
    const double rhs = images.col(2 * p + 1).dot(v);
    const double scale =
        std::max(1.0, images.col(2 * p).norm() * w.norm() + images.col(2 * p + 1).norm() * v.norm());
    if (std::abs(lhs - rhs) > 1e-8 * scale) {
      throw ParameterError("operator failed the symmetry probe (|<Av,w> - <Aw,v>| = " +
                           std::to_string(std::abs(lhs - rhs)) + ")");
    }
  }
}

SymmetricEig top_k_from_ascending(const Matrix& basis, const Matrix& vectors,
                                  const Vector& values, Index k) {
  const Index r = values.size();
  SymmetricEig out{Matrix(basis.rows(), k), Vector(k)};
  for (Index i = 0; i < k; ++i) {
    out.values(i) = values(r - 1 - i);
    out.vectors.col(i) = basis * vectors.col(r - 1 - i);
  }
  return out;
}

// Orthogonalizes x against the orthonormal columns of basis (two passes) and
// returns an orthonormal basis of what remains, dropping negligible columns.
Matrix expand_basis(const Matrix& basis, Matrix x, double scale) {
  for (int pass = 0; pass < 2; ++pass) {
    if (basis.cols() > 0) x.noalias() -= basis * (basis.transpose() * x);
  }
  if (x.cols() == 0) return x;
  Eigen::ColPivHouseholderQR<Matrix> qr(x);
  Index rank = 0;
  const double cutoff = 1e-12 * std::max(scale, std::numeric_limits<double>::min());
  for (Index i = 0; i < std::min(x.rows(), x.cols()); ++i) {
    if (std::abs(qr.matrixQR()(i, i)) > cutoff) ++rank;
  }
  Matrix q = Matrix::Identity(x.rows(), rank);
  q.applyOnTheLeft(qr.householderQ());
  if (basis.cols() > 0) q -= basis * (basis.transpose() * q);
  return thin_q(q);
}

}  // namespace

// ---------------------------------------------------------------------------

LinearMap::LinearMap(Index rows, Index cols, BlockFn apply, BlockFn apply_transpose)
    : rows_(rows), cols_(cols), apply_(std::move(apply)),
      apply_transpose_(std::move(apply_transpose)) {
  if (rows < 0 || cols < 0) throw ParameterError("LinearMap: negative dimension");
}

LinearMap LinearMap::from_dense(Matrix a) {
  auto shared = std::make_shared<const Matrix>(std::move(a));
  const Index rows = shared->rows();
  const Index cols = shared->cols();
  return LinearMap(
      rows, cols, [shared](const Matrix& x) -> Matrix { return *shared * x; },
      [shared](const Matrix& x) -> Matrix { return shared->transpose() * x; });
}

Matrix LinearMap::apply(const Matrix& x) const {
  if (x.rows() != cols_) {
    throw ParameterError("LinearMap::apply: expected " + std::to_string(cols_) +
                         " rows, got " + std::to_string(x.rows()));
  }
  return apply_(x);
}

Matrix LinearMap::apply_transpose(const Matrix& x) const {
  if (x.rows() != rows_) {
    throw ParameterError("LinearMap::apply_transpose: expected " + std::to_string(rows_) +
                         " rows, got " + std::to_string(x.rows()));
  }
  return apply_transpose_(x);
}

Vector LinearMap::matvec(const Vector& x) const { return apply(Matrix(x)).col(0); }
Vector LinearMap::rmatvec(const Vector& x) const { return apply_transpose(Matrix(x)).col(0); }
Matrix LinearMap::to_dense() const { return materialize(*this); }

SvdConvergenceError::SvdConvergenceError(TruncatedSVD best, double residual)
    : ConvergenceError("truncated SVD did not reach the requested accuracy (relative residual " +
                       std::to_string(residual) + ")"),
      best_(std::move(best)), residual_(residual) {}

EigConvergenceError::EigConvergenceError(SymmetricEig best, double residual)
    : ConvergenceError("eigensolver did not reach the requested accuracy (relative residual " +
                       std::to_string(residual) + ")"),
      best_(std::move(best)), residual_(residual) {}

// ---------------------------------------------------------------------------

TruncatedSVD truncated_svd(const LinearMap& op, Index k, const SpectralOptions& options) {
  const Index p = std::min(op.rows(), op.cols());
  if (k < 1 || k > p) {
    throw ParameterError("truncated_svd: rank " + std::to_string(k) + " outside [1, " +
                         std::to_string(p) + "]");
  }
  if (p <= options.dense_cutoff) return dense_truncated_svd(materialize(op), k);

  const Index l = std::min(k + options.oversample, p);
  Matrix q = thin_q(op.apply(gaussian_block(op.cols(), l, options.seed)));
  for (int i = 0; i < options.power_iters; ++i) {
    q = thin_q(op.apply(thin_q(op.apply_transpose(q))));
  }

  TruncatedSVD best;
  double best_residual = std::numeric_limits<double>::infinity();
  for (int iter = options.power_iters;; ++iter) {
    const Matrix atq = op.apply_transpose(q);  // B^T with B = Q^T A
    Eigen::JacobiSVD<Matrix> svd(atq, Eigen::ComputeThinU | Eigen::ComputeThinV);
    TruncatedSVD current{q * svd.matrixV().leftCols(k), svd.singularValues().head(k),
                         svd.matrixU().leftCols(k)};

    const Matrix av = op.apply(current.V);
    double residual = 0.0;
    for (Index i = 0; i < k; ++i) {
      residual = std::max(residual, (av.col(i) - current.S(i) * current.U.col(i)).norm());
    }
    const double sigma1 = current.S(0);
    const double relative = sigma1 > 0.0 ? residual / sigma1 : residual;
    if (relative < best_residual) {
      best_residual = relative;
      best = current;
    }
    if (relative <= options.tol) {
      normalize_signs(best.U, &best.V);
      return best;
    }
    if (iter >= options.max_iters) {
      normalize_signs(best.U, &best.V);
      throw SvdConvergenceError(std::move(best), best_residual);
    }
    q = thin_q(op.apply(thin_q(atq)));
  }
}

SymmetricEig symmetric_eig_topk(const LinearMap& op, Index k, const SpectralOptions& options) {
  check_symmetric(op, options.seed);
  const Index n = op.rows();
  if (k < 1 || k > n) {
    throw ParameterError("symmetric_eig_topk: k = " + std::to_string(k) + " outside [1, " +
                         std::to_string(n) + "]");
  }
  if (n <= options.dense_cutoff) {
    Matrix a = materialize(op);
    a = 0.5 * (a + a.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a);
    SymmetricEig out = top_k_from_ascending(Matrix::Identity(n, n), eig.eigenvectors(),
                                            eig.eigenvalues(), k);
    normalize_signs(out.vectors);
    return out;
  }

  // Randomized block Krylov: span{Q0, A Q0, A^2 Q0, ...} with Rayleigh-Ritz.
  const Index b = std::min(k + options.oversample, n);
  Matrix basis = thin_q(gaussian_block(n, b, options.seed));
  Matrix images = op.apply(basis);
  const double scale = std::max(images.norm(), std::numeric_limits<double>::min());

  SymmetricEig best;
  double best_residual = std::numeric_limits<double>::infinity();
  for (int block = 1;; ++block) {
    const bool exhausted = basis.cols() >= n;
    if (block > options.power_iters || exhausted) {
      Matrix t = basis.transpose() * images;
      t = 0.5 * (t + t.transpose()).eval();
      Eigen::SelfAdjointEigenSolver<Matrix> eig(t);
      if (basis.cols() >= k) {
        SymmetricEig current = top_k_from_ascending(basis, eig.eigenvectors(), eig.eigenvalues(), k);
        const Index r = eig.eigenvalues().size();
        double residual = 0.0;
        for (Index i = 0; i < k; ++i) {
          const Vector ax = images * eig.eigenvectors().col(r - 1 - i);
          residual = std::max(residual, (ax - current.values(i) * current.vectors.col(i)).norm());
        }
        const double lam_scale = std::max(eig.eigenvalues().cwiseAbs().maxCoeff(),
                                          std::numeric_limits<double>::min());
        const double relative = residual / lam_scale;
        if (relative < best_residual) {
          best_residual = relative;
          best = current;
        }
        if (relative <= options.tol || exhausted) {
          normalize_signs(best.vectors);
          return best;
        }
      }
      if (block >= options.max_iters) {
        normalize_signs(best.vectors);
        throw EigConvergenceError(std::move(best), best_residual);
      }
    }
    const Index last = std::min<Index>(b, basis.cols());
    Matrix next = expand_basis(basis, images.rightCols(last), scale);
    if (next.cols() == 0) {
      // Invariant subspace reached; pad with fresh random directions.
      next = expand_basis(basis, gaussian_block(n, b, options.seed + block), 1.0);
      if (next.cols() == 0) continue;
    }
    const Matrix next_images = op.apply(next);
    Matrix grown_basis(n, basis.cols() + next.cols());
    grown_basis << basis, next;
    Matrix grown_images(n, images.cols() + next_images.cols());
    grown_images << images, next_images;
    basis.swap(grown_basis);
    images.swap(grown_images);
  }
}

SymmetricEig symmetric_eig_topk_in_range(const LinearMap& op, const Matrix& range, Index k) {
  const Index n = op.rows();
  if (op.cols() != n) throw ParameterError("symmetric_eig_topk_in_range: operator not square");
  if (range.rows() != n) throw ParameterError("symmetric_eig_topk_in_range: range row mismatch");
  if (k < 1 || k > n) {
    throw ParameterError("symmetric_eig_topk_in_range: k = " + std::to_string(k) +
                         " outside [1, " + std::to_string(n) + "]");
  }

  const Matrix q = orthonormal_basis(range);
  const Index r = q.cols();
  Matrix aq = op.apply(q);
  Matrix t = q.transpose() * aq;
  const double asym = (t - t.transpose()).norm();
  const double t_scale = std::max(1.0, t.norm());
  if (asym > 1e-8 * t_scale) {
    throw ParameterError("symmetric_eig_topk_in_range: operator is not symmetric");
  }
  t = 0.5 * (t + t.transpose()).eval();
  aq.noalias() -= q * t;  // part of A Q outside span(Q)
  if (aq.norm() > 1e-8 * std::max(1.0, t.norm())) {
    throw ParameterError("symmetric_eig_topk_in_range: span(range) is not invariant");
  }
  aq.resize(0, 0);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(t);
  const Vector& theta = eig.eigenvalues();  // ascending
  const Index complement = n - r;

  // Merge Ritz values (descending) with the complement's zero eigenvalue.
  SymmetricEig out{Matrix(n, k), Vector(k)};
  Index ritz = r - 1;
  Index zeros_used = 0;
  std::vector<Index> zero_slots;
  for (Index i = 0; i < k; ++i) {
    const bool ritz_left = ritz >= 0;
    const bool zero_left = zeros_used < complement;
    if (ritz_left && (!zero_left || theta(ritz) >= 0.0)) {
      out.values(i) = theta(ritz);
      out.vectors.col(i) = q * eig.eigenvectors().col(ritz);
      --ritz;
    } else {
      out.values(i) = 0.0;
      zero_slots.push_back(i);
      ++zeros_used;
    }
  }

  if (!zero_slots.empty()) {
    // Deterministic unit vectors orthogonal to span(Q): project e_0, e_1, ...
    Matrix found(n, 0);
    for (Index e = 0; e < n && found.cols() < static_cast<Index>(zero_slots.size()); ++e) {
      Vector v = Vector::Zero(n);
      v(e) = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        if (r > 0) v -= q * (q.transpose() * v);
        if (found.cols() > 0) v -= found * (found.transpose() * v);
      }
      const double norm = v.norm();
      if (norm > 0.5) {
        found.conservativeResize(n, found.cols() + 1);
        found.col(found.cols() - 1) = v / norm;
      }
    }
    for (std::size_t z = 0; z < zero_slots.size(); ++z) {
      out.vectors.col(zero_slots[z]) = found.col(static_cast<Index>(z));
    }
  }
  normalize_signs(out.vectors);
  return out;
}

// ---------------------------------------------------------------------------

PgramFactors pgram_factors(const Matrix& Y, const Matrix& Z, const Matrix& Phi, double lambda,
                           double rho1) {
  const Index n = Y.rows();
  if (Z.rows() != n || Phi.rows() != n) {
    throw ParameterError("build_pgram_operator: Y, Z, Phi must share the row count");
  }
  if (Z.cols() != Phi.cols()) {
    throw ParameterError("build_pgram_operator: Z and Phi must have the same column count");
  }
  if (!(lambda >= 0.0) || !(rho1 >= 0.0)) {
    throw ParameterError("build_pgram_operator: lambda and rho1 must be nonnegative");
  }
  const Index d = Y.cols();
  const Index k = Z.cols();
  const double sl = std::sqrt(lambda);
  const double sr = std::sqrt(0.5 * rho1);
  const double sh = std::sqrt(0.5);
  PgramFactors f{Matrix(n, d + 3 * k), Matrix(n, d + 3 * k)};
  f.F1 << sl * Y, sr * Z, sh * Phi, sh * Z;
  f.F2 << sl * Y, sr * Z, sh * Z, sh * Phi;
  return f;
}

LinearMap build_pgram_operator(const Matrix& Y, const Matrix& Z, const Matrix& Phi, double lambda,
                               double rho1) {
  return pgram_operator(std::make_shared<const PgramFactors>(pgram_factors(Y, Z, Phi, lambda, rho1)));
}

LinearMap pgram_operator(std::shared_ptr<const PgramFactors> f) {
  const Index n = f->F1.rows();
  return LinearMap(
      n, n, [f](const Matrix& x) -> Matrix { return f->F1 * (f->F2.transpose() * x); },
      [f](const Matrix& x) -> Matrix { return f->F2 * (f->F1.transpose() * x); });
}

Matrix soft_threshold_svd(const Matrix& X, double tau, std::optional<Index> max_rank) {
  if (!(tau >= 0.0)) throw ParameterError("soft_threshold_svd: tau must be nonnegative");
  if (max_rank && *max_rank < 0) throw ParameterError("soft_threshold_svd: negative max_rank");
  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Index terms = s.size();
  if (max_rank) terms = std::min(terms, *max_rank);
  Index kept = 0;
  while (kept < terms && s(kept) > tau) ++kept;
  const Vector shrunk = (s.head(kept).array() - tau).matrix();
  return svd.matrixU().leftCols(kept) * shrunk.asDiagonal() *
         svd.matrixV().leftCols(kept).transpose();
}

double orthonormality_error(const Matrix& M) {
  if (M.cols() == 0) return 0.0;
  return (M.transpose() * M - Matrix::Identity(M.cols(), M.cols())).cwiseAbs().maxCoeff();
}

Matrix apply_projection(const Matrix& M, const Matrix& R) {
  if (M.rows() != R.rows()) {
    throw ParameterError("apply_projection: M has " + std::to_string(M.rows()) +
                         " rows but R has " + std::to_string(R.rows()));
  }
  if (orthonormality_error(M) > 1e-6) {
    throw ParameterError("apply_projection: M does not have orthonormal columns");
  }
  return M * (M.transpose() * R);
}

Matrix orthonormal_basis(const Matrix& A, double rel_tol) {
  if (A.cols() == 0) return Matrix(A.rows(), 0);
  Eigen::ColPivHouseholderQR<Matrix> qr(A);
  qr.setThreshold(rel_tol);
  const Index rank = qr.rank();
  Matrix q = Matrix::Identity(A.rows(), rank);
  q.applyOnTheLeft(qr.householderQ());
  return q;
}

double rank_tolerance(Index rows, Index cols, double sigma1) {
  return sigma1 * static_cast<double>(std::max(rows, cols)) * kRankEps;
}

namespace {

TruncatedSVD truncate_to_rank(Matrix U, Vector S, Matrix V, Index rows, Index cols) {
  Index r = 0;
  if (S.size() > 0) {
    const double tol = rank_tolerance(rows, cols, S(0));
    while (r < S.size() && S(r) > tol) ++r;
  }
  TruncatedSVD out{U.leftCols(r), S.head(r), V.leftCols(r)};
  normalize_signs(out.U, &out.V);
  return out;
}

}  // namespace

TruncatedSVD compact_svd(const Matrix& X) {
  Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return truncate_to_rank(svd.matrixU(), svd.singularValues(), svd.matrixV(), X.rows(), X.cols());
}

TruncatedSVD compact_svd_factored(const Matrix& Uf, const Matrix& Vf) {
  if (Uf.cols() != Vf.cols()) {
    throw ParameterError("compact_svd_factored: factors must have the same column count");
  }
  Eigen::HouseholderQR<Matrix> qu(Uf);
  Eigen::HouseholderQR<Matrix> qv(Vf);
  const Index ku = std::min(Uf.rows(), Uf.cols());
  const Index kv = std::min(Vf.rows(), Vf.cols());
  const Matrix ru = qu.matrixQR().topRows(ku).triangularView<Eigen::Upper>();
  const Matrix rv = qv.matrixQR().topRows(kv).triangularView<Eigen::Upper>();
  const Matrix core = ru * rv.transpose();  // ku x kv
  Eigen::JacobiSVD<Matrix> svd(core, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Matrix U = Matrix::Identity(Uf.rows(), ku);
  U.applyOnTheLeft(qu.householderQ());
  Matrix V = Matrix::Identity(Vf.rows(), kv);
  V.applyOnTheLeft(qv.householderQ());
  return truncate_to_rank(U * svd.matrixU(), svd.singularValues(), V * svd.matrixV(), Uf.rows(),
                          Vf.rows());
}

void normalize_signs(Matrix& vectors, Matrix* partner) {
  for (Index j = 0; j < vectors.cols(); ++j) {
    for (Index i = 0; i < vectors.rows(); ++i) {
      const double v = vectors(i, j);
      if (v == 0.0) continue;
      if (v < 0.0) {
        vectors.col(j) *= -1.0;
        if (partner != nullptr && j < partner->cols()) partner->col(j) *= -1.0;
      }
      break;
    }
  }
}

double projector_distance(const Matrix& A, const Matrix& B) {
  // ||AA^T - BB^T||_F^2 = ka + kb - 2 ||A^T B||_F^2 for orthonormal columns.
  const double cross = (A.transpose() * B).squaredNorm();
  const double sq = static_cast<double>(A.cols() + B.cols()) - 2.0 * cross;
  return std::sqrt(std::max(0.0, sq));
}

Matrix pseudo_inverse(const Matrix& A, double rel_cutoff) {
  Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  Vector inv = Vector::Zero(s.size());
  if (s.size() > 0) {
    const double cutoff = s(0) * rel_cutoff;
    for (Index i = 0; i < s.size(); ++i) {
      if (s(i) > cutoff && s(i) > 0.0) inv(i) = 1.0 / s(i);
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

bool all_finite(const Matrix& A) { return A.allFinite(); }

}  // namespace mpadmm::linalg
