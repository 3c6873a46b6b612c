#include "mpadmm/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mpadmm {

namespace {

void check_rows(const Matrix& X, const Matrix& Y, const char* what) {
  if (X.rows() != Y.rows()) {
    throw ParameterError(std::string(what) + ": X has " + std::to_string(X.rows()) +
                         " rows but Y has " + std::to_string(Y.rows()));
  }
}

void check_data(const Matrix& X, const PartialMatrix& data, const Matrix& Y, const char* what) {
  if (X.rows() != data.rows() || X.cols() != data.cols()) {
    throw ParameterError(std::string(what) + ": X shape does not match the data");
  }
  check_rows(X, Y, what);
}

ObjectiveBreakdown assemble(double fit, double side, double reg) {
  return {fit, side, reg, fit + side + reg};
}

// lambda ||(I - U U^T) Y||_F^2 for orthonormal U, without the cancellation of
// ||Y||^2 - ||U^T Y||^2.
double side_term_from_basis(const Matrix& U, const Matrix& Y, double lambda) {
  if (lambda == 0.0) return 0.0;
  if (U.cols() == 0) return lambda * Y.squaredNorm();
  return lambda * (Y - U * (U.transpose() * Y)).squaredNorm();
}

double pooled_r2(const Matrix& Y, const Matrix& Y_hat) {
  const double ss_res = (Y - Y_hat).squaredNorm();
  const Eigen::RowVectorXd mean = Y.colwise().mean();
  const double ss_tot = (Y.rowwise() - mean).squaredNorm();
  if (ss_tot <= 1e-24 * Y.squaredNorm()) {
    if (ss_res <= 1e-24 * Y.squaredNorm()) return 1.0;
    throw ParameterError("r_squared: Y is constant but the fit is not exact");
  }
  return 1.0 - ss_res / ss_tot;
}

}  // namespace

Matrix ols_alpha(const Matrix& X, const Matrix& Y) {
  check_rows(X, Y, "ols_alpha");
  return linalg::pseudo_inverse(X, 1e-12) * Y;
}

Matrix ols_alpha_factored(const Matrix& Uf, const Matrix& Vf, const Matrix& Y) {
  check_rows(Uf, Y, "ols_alpha_factored");
  const linalg::TruncatedSVD svd = linalg::compact_svd_factored(Uf, Vf);
  linalg::Vector inv = linalg::Vector::Zero(svd.S.size());
  for (Index i = 0; i < svd.S.size(); ++i) {
    if (svd.S(i) > svd.S(0) * 1e-12) inv(i) = 1.0 / svd.S(i);
  }
  return svd.V * (inv.asDiagonal() * (svd.U.transpose() * Y));
}

double objective_at_alpha(const Matrix& X, const Matrix& alpha, const PartialMatrix& data,
                          const Matrix& Y, double lambda, double gamma) {
  check_data(X, data, Y, "objective_at_alpha");
  if (alpha.rows() != X.cols() || alpha.cols() != Y.cols()) {
    throw ParameterError("objective_at_alpha: alpha shape mismatch");
  }
  Eigen::JacobiSVD<Matrix> svd(X);
  return data.fit_residual(X) + lambda * (Y - X * alpha).squaredNorm() +
         gamma * svd.singularValues().sum();
}

ObjectiveBreakdown objective_naive(const Matrix& X, const PartialMatrix& data, const Matrix& Y,
                                   double lambda, double gamma) {
  check_data(X, data, Y, "objective_naive");
  const double fit = data.fit_residual(X);

  // (X^T X)^+ through its eigendecomposition.
  const Matrix gram = X.transpose() * X;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const linalg::Vector& w = eig.eigenvalues();
  const double wmax = w.size() > 0 ? w.cwiseAbs().maxCoeff() : 0.0;
  linalg::Vector inv = linalg::Vector::Zero(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) > 1e-10 * wmax && w(i) > 0.0) inv(i) = 1.0 / w(i);
  }
  const Matrix gram_pinv = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
  const Matrix residual = Y - X * (gram_pinv * (X.transpose() * Y));
  const double side = lambda * residual.squaredNorm();

  Eigen::JacobiSVD<Matrix> svd(X);
  const double reg = gamma * svd.singularValues().sum();
  return assemble(fit, side, reg);
}

ObjectiveBreakdown objective_svd(const Matrix& X, const PartialMatrix& data, const Matrix& Y,
                                 double lambda, double gamma) {
  check_data(X, data, Y, "objective_svd");
  const linalg::TruncatedSVD svd = linalg::compact_svd(X);
  return assemble(data.fit_residual(X), side_term_from_basis(svd.U, Y, lambda),
                  gamma * svd.S.sum());
}

ObjectiveBreakdown objective_svd_factored(const Matrix& Uf, const Matrix& Vf,
                                          const PartialMatrix& data, const Matrix& Y,
                                          double lambda, double gamma) {
  if (Uf.rows() != data.rows() || Vf.rows() != data.cols() || Uf.cols() != Vf.cols()) {
    throw ParameterError("objective_svd_factored: factor shapes do not match the data");
  }
  check_rows(Uf, Y, "objective_svd_factored");
  const linalg::TruncatedSVD svd = linalg::compact_svd_factored(Uf, Vf);
  return assemble(data.fit_residual(Uf, Vf), side_term_from_basis(svd.U, Y, lambda),
                  gamma * svd.S.sum());
}

double spectral_bound(const PartialMatrix& data, const Matrix& Y, double lambda, double gamma) {
  if (!(gamma > 0.0)) throw ParameterError("spectral_bound: gamma must be > 0");
  if (Y.rows() != data.rows()) throw ParameterError("spectral_bound: Y row count mismatch");
  return (data.squared_norm() + lambda * Y.squaredNorm()) / gamma;
}

WorstCase worst_case_delta(const Matrix& X, double gamma) {
  if (!(gamma >= 0.0)) throw ParameterError("worst_case_delta: gamma must be >= 0");
  const linalg::TruncatedSVD svd = linalg::compact_svd(X);
  WorstCase out;
  out.Delta = gamma * svd.U * svd.V.transpose();
  out.inner = (X.array() * out.Delta.array()).sum();
  return out;
}

double err_l2(const Matrix& X_hat, const Matrix& A_true) {
  if (X_hat.rows() != A_true.rows() || X_hat.cols() != A_true.cols()) {
    throw ParameterError("err_l2: shape mismatch");
  }
  const double denom = A_true.squaredNorm();
  if (denom == 0.0) throw ParameterError("err_l2: A_true is zero");
  return (X_hat - A_true).squaredNorm() / denom;
}

double r_squared(const Matrix& X_hat, const Matrix& Y) {
  check_rows(X_hat, Y, "r_squared");
  if (Y.cols() < 1) throw ParameterError("r_squared: Y has no columns");
  return pooled_r2(Y, X_hat * ols_alpha(X_hat, Y));
}

double r_squared_factored(const Matrix& Uf, const Matrix& Vf, const Matrix& Y) {
  check_rows(Uf, Y, "r_squared");
  if (Y.cols() < 1) throw ParameterError("r_squared: Y has no columns");
  const linalg::TruncatedSVD svd = linalg::compact_svd_factored(Uf, Vf);
  return pooled_r2(Y, svd.U * (svd.U.transpose() * Y));
}

Index fitted_rank(const Matrix& X_hat) { return linalg::compact_svd(X_hat).S.size(); }

Index fitted_rank_factored(const Matrix& Uf, const Matrix& Vf) {
  return linalg::compact_svd_factored(Uf, Vf).S.size();
}

Metrics evaluate_factored(const Matrix& Uf, const Matrix& Vf, const PartialMatrix& data,
                          const Matrix& Y, const Matrix& A_true, double lambda, double gamma) {
  Metrics out;
  out.objective = objective_svd_factored(Uf, Vf, data, Y, lambda, gamma);
  out.r2 = r_squared_factored(Uf, Vf, Y);
  out.fitted_rank = fitted_rank_factored(Uf, Vf);
  out.err_l2 = A_true.size() > 0 ? err_l2(Uf * Vf.transpose(), A_true)
                                 : std::numeric_limits<double>::quiet_NaN();
  return out;
}

Metrics evaluate_dense(const Matrix& X_hat, const PartialMatrix& data, const Matrix& Y,
                       const Matrix& A_true, double lambda, double gamma) {
  Metrics out;
  out.objective = objective_svd(X_hat, data, Y, lambda, gamma);
  out.r2 = r_squared(X_hat, Y);
  out.fitted_rank = fitted_rank(X_hat);
  out.err_l2 = A_true.size() > 0 ? err_l2(X_hat, A_true)
                                 : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace mpadmm
