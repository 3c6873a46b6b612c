#include "mpadmm/baselines.hpp"

#include <chrono>
#include <cmath>
#include <string>

#include "mpadmm/objective.hpp"
#include "mpadmm/timers.hpp"

namespace mpadmm {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_rank(Index k, const PartialMatrix& data) {
  if (k < 1 || k > std::min(data.rows(), data.cols())) {
    throw ParameterError("rank k = " + std::to_string(k) + " outside [1, min(n, m)]");
  }
}

// Inverse of a small SPD Gram matrix; falls back to a ridge of 1e-10 * trace.
Matrix gram_inverse(const Matrix& G, bool& ridge_used) {
  const Index k = G.rows();
  Eigen::LLT<Matrix> llt(G);
  const bool ok = llt.info() == Eigen::Success &&
                  llt.matrixL().toDenseMatrix().diagonal().minCoeff() >
                      1e-8 * std::sqrt(std::max(G.diagonal().maxCoeff(), 0.0));
  if (ok) return llt.solve(Matrix::Identity(k, k));
  ridge_used = true;
  const double ridge = 1e-10 * std::max(G.trace(), 1.0);
  Eigen::LLT<Matrix> reg(G + ridge * Matrix::Identity(k, k));
  if (reg.info() != Eigen::Success) throw NumericalError("scaled_gd: Gram matrix is not PSD");
  return reg.solve(Matrix::Identity(k, k));
}

}  // namespace

const char* to_string(StopReason r) {
  return r == StopReason::converged ? "converged" : "max_iters";
}

Matrix BaselineResult::dense() const { return factored() ? Matrix(U * V.transpose()) : X_hat; }

BaselineResult iterative_svd(const PartialMatrix& data, Index k, const IterativeSvdOptions& opt) {
  check_rank(k, data);
  if (data.nnz() == 0) throw ParameterError("iterative_svd: every entry is missing");
  const auto start = std::chrono::steady_clock::now();
  const Index n = data.rows();
  const Index m = data.cols();

  std::vector<char> observed(static_cast<std::size_t>(n * m), 0);
  linalg::Vector row_sum = linalg::Vector::Zero(n);
  Eigen::VectorXi row_count = Eigen::VectorXi::Zero(n);
  double total = 0.0;
  Matrix X(n, m);
  for (const Entry& e : data.entries()) {
    observed[static_cast<std::size_t>(e.row * m + e.col)] = 1;
    row_sum(e.row) += e.value;
    ++row_count(e.row);
    total += e.value;
    X(e.row, e.col) = e.value;
  }
  const double global_mean = total / static_cast<double>(data.nnz());

  std::vector<std::pair<Index, Index>> missing;
  for (Index i = 0; i < n; ++i) {
    const double fill = row_count(i) > 0 ? row_sum(i) / row_count(i) : global_mean;
    for (Index j = 0; j < m; ++j) {
      if (!observed[static_cast<std::size_t>(i * m + j)]) {
        X(i, j) = fill;
        missing.emplace_back(i, j);
      }
    }
  }

  BaselineResult out;
  out.termination = StopReason::converged;
  if (missing.empty()) {
    out.X_hat = std::move(X);
    out.wall_ms = elapsed_ms(start);
    return out;
  }

  out.termination = StopReason::max_iters;
  std::vector<double> next(missing.size());
  for (int t = 1; t <= opt.max_iters; ++t) {
    Eigen::BDCSVD<Matrix> svd(X, Eigen::ComputeThinV);
    const Matrix V = svd.matrixV().leftCols(k);
    const Matrix proj = X * V;  // row i: V^T x_i
    // Leave-one-out normal matrix is I - v v^T; its pseudo-inverse drops the
    // direction v when 1 - |v|^2 falls under 1e-10 times its largest eigenvalue.
    for (std::size_t t2 = 0; t2 < missing.size(); ++t2) {
      const auto [i, j] = missing[t2];
      const auto v = V.row(j);
      const double s = v.squaredNorm();
      const double smallest = 1.0 - s;
      const double largest = k > 1 ? std::max(1.0, smallest) : smallest;
      if (smallest > 1e-10 * largest && smallest > 0.0) {
        const double vb = v.dot(proj.row(i)) - s * X(i, j);
        next[t2] = vb / smallest;
      } else {
        next[t2] = 0.0;
      }
    }
    double change = 0.0;
    for (std::size_t t2 = 0; t2 < missing.size(); ++t2) {
      const auto [i, j] = missing[t2];
      const double d = next[t2] - X(i, j);
      change += d * d;
      X(i, j) = next[t2];
    }
    change = std::sqrt(change);
    out.trace.push_back(change);
    out.iterations = t;
    if (!std::isfinite(change)) throw NumericalError("iterative_svd: non-finite update", t);
    if (change < opt.tol) {
      out.termination = StopReason::converged;
      break;
    }
  }
  out.X_hat = std::move(X);
  out.wall_ms = elapsed_ms(start);
  return out;
}

double soft_impute_default_tau(const PartialMatrix& data) {
  Eigen::BDCSVD<Matrix> svd(data.to_dense());
  return svd.singularValues().size() > 0 ? svd.singularValues()(0) / 50.0 : 0.0;
}

BaselineResult soft_impute(const PartialMatrix& data, const SoftImputeOptions& opt) {
  const double tau = opt.tau ? *opt.tau : soft_impute_default_tau(data);
  if (!(tau >= 0.0)) throw ParameterError("soft_impute: tau must be >= 0");
  if (opt.k_cap < 0) throw ParameterError("soft_impute: k_cap must be >= 0");
  const auto start = std::chrono::steady_clock::now();
  const std::optional<Index> cap = opt.k_cap > 0 ? std::optional<Index>(opt.k_cap) : std::nullopt;

  BaselineResult out;
  Matrix Z = Matrix::Zero(data.rows(), data.cols());
  for (int t = 1; t <= opt.max_iters; ++t) {
    Matrix filled = Z;
    for (const Entry& e : data.entries()) filled(e.row, e.col) = e.value;
    Matrix next = linalg::soft_threshold_svd(filled, tau, cap);
    const double ratio = (Z - next).squaredNorm() / std::max(Z.squaredNorm(), 1e-30);
    Z = std::move(next);
    out.trace.push_back(ratio);
    out.iterations = t;
    if (ratio < opt.eps) {
      out.termination = StopReason::converged;
      break;
    }
  }
  out.X_hat = std::move(Z);
  out.wall_ms = elapsed_ms(start);
  return out;
}

double scaled_gd_loss(const Matrix& U, const Matrix& V, const Matrix& alpha,
                      const PartialMatrix& data, const Matrix& Y, double lambda, double gamma) {
  return data.fit_residual(U, V) + lambda * (Y - U * (V.transpose() * alpha)).squaredNorm() +
         0.5 * gamma * (U.squaredNorm() + V.squaredNorm());
}

FactorGradient scaled_gd_gradient(const Matrix& U, const Matrix& V, const Matrix& alpha,
                                  const PartialMatrix& data, const Matrix& Y, double lambda,
                                  double gamma) {
  const RowMatrix u = U;
  const RowMatrix v = V;
  RowMatrix du = RowMatrix::Zero(U.rows(), U.cols());
  RowMatrix dv = RowMatrix::Zero(V.rows(), V.cols());
  for (const Entry& e : data.entries()) {
    const double r = 2.0 * (u.row(e.row).dot(v.row(e.col)) - e.value);
    du.row(e.row) += r * v.row(e.col);
    dv.row(e.col) += r * u.row(e.row);
  }
  const Matrix R = U * (V.transpose() * alpha) - Y;  // n x d
  FactorGradient g;
  g.dU = Matrix(du) + (2.0 * lambda) * R * (alpha.transpose() * V) + gamma * U;
  g.dV = Matrix(dv) + (2.0 * lambda) * alpha * (R.transpose() * U) + gamma * V;
  return g;
}

BaselineResult scaled_gd(const PartialMatrix& data, const Matrix& Y, double lambda, double gamma,
                         Index k, const ScaledGdOptions& opt) {
  check_rank(k, data);
  if (Y.rows() != data.rows()) throw ParameterError("scaled_gd: Y row count mismatch");
  if (opt.max_iters < 1) throw ParameterError("scaled_gd: max_iters must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  linalg::SpectralOptions sopts;
  sopts.seed = opt.seed;
  linalg::TruncatedSVD svd;
  try {
    svd = linalg::truncated_svd(data.as_operator(), k, sopts);
  } catch (const linalg::SvdConvergenceError& e) {
    svd = e.best();
  }
  const double sigma1 = svd.S(0);
  double eta = 0.0;
  if (opt.eta) {
    eta = *opt.eta;
  } else {
    if (!(sigma1 > 0.0)) throw ParameterError("scaled_gd: zero-filled data has sigma_1 = 0");
    eta = 1.0 / (10.0 * sigma1);
  }
  const linalg::Vector root = svd.S.cwiseMax(0.0).cwiseSqrt();
  Matrix U = svd.U * root.asDiagonal();
  Matrix V = svd.V * root.asDiagonal();

  BaselineResult out;
  Matrix alpha = ols_alpha_factored(U, V, Y);
  double f_prev = scaled_gd_loss(U, V, alpha, data, Y, lambda, gamma);
  out.trace.push_back(f_prev);
  for (int t = 1; t <= opt.max_iters; ++t) {
    const FactorGradient g = scaled_gd_gradient(U, V, alpha, data, Y, lambda, gamma);
    const Matrix vtv_inv = gram_inverse(V.transpose() * V, out.ridge_used);
    const Matrix utu_inv = gram_inverse(U.transpose() * U, out.ridge_used);
    U -= eta * g.dU * vtv_inv;
    V -= eta * g.dV * utu_inv;
    if (!U.allFinite() || !V.allFinite()) {
      throw NumericalError("scaled_gd: iterate diverged at iteration " + std::to_string(t), t);
    }
    alpha = ols_alpha_factored(U, V, Y);
    const double f = scaled_gd_loss(U, V, alpha, data, Y, lambda, gamma);
    out.trace.push_back(f);
    out.iterations = t;
    if (f > f_prev + 1e-9 * std::abs(f_prev)) ++out.monotone_violations;
    const double rel = f_prev != 0.0 ? (f_prev - f) / f_prev : 0.0;
    f_prev = f;
    if (rel < opt.rel_tol) {
      out.termination = StopReason::converged;
      break;
    }
  }
  out.U = std::move(U);
  out.V = std::move(V);
  out.wall_ms = elapsed_ms(start);
  return out;
}

}  // namespace mpadmm
