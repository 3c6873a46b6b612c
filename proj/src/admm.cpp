#include "mpadmm/admm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <string>

#include "mpadmm/objective.hpp"

namespace mpadmm {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void run_rows(ThreadPool* pool, Index count, const std::function<void(Index, Index)>& body) {
  if (pool == nullptr || pool->size() == 1 || count < 2) {
    body(0, count);
    return;
  }
  pool->parallel_for(static_cast<std::size_t>(count), [&](std::size_t b, std::size_t e) {
    body(static_cast<Index>(b), static_cast<Index>(e));
  });
}

void require_finite(const Matrix& X, const char* name, long iteration) {
  if (!X.allFinite()) {
    throw NumericalError(std::string("non-finite entries in ") + name + " at iteration " +
                             std::to_string(iteration),
                         iteration);
  }
}

void require_shape(const Matrix& X, Index rows, Index cols, const char* name) {
  if (X.rows() != rows || X.cols() != cols) {
    throw ParameterError(std::string(name) + " must be " + std::to_string(rows) + "x" +
                         std::to_string(cols) + ", got " + std::to_string(X.rows()) + "x" +
                         std::to_string(X.cols()));
  }
}

// Top-k of lambda Y Y^T + (rho1 / 2) Z Z^T + (Phi Z^T + Z Phi^T) / 2. The
// column span of F1 contains the range, so Rayleigh-Ritz on it is exact.
linalg::SymmetricEig pgram_topk(const Matrix& Y, const Matrix& Z, const Matrix& Phi,
                                double lambda, double rho1, Index k) {
  auto factors =
      std::make_shared<const linalg::PgramFactors>(linalg::pgram_factors(Y, Z, Phi, lambda, rho1));
  return linalg::symmetric_eig_topk_in_range(linalg::pgram_operator(factors), factors->F1, k);
}

}  // namespace

const char* to_string(Termination t) {
  return t == Termination::tolerance_met ? "tolerance_met" : "max_iters";
}

ObservationMasks::ObservationMasks(const PartialMatrix& data) {
  const Index n = data.rows();
  const Index m = data.cols();
  const auto& entries = data.entries();
  row_ptr_.assign(static_cast<std::size_t>(n) + 1, 0);
  col_ptr_.assign(static_cast<std::size_t>(m) + 1, 0);
  for (const Entry& e : entries) {
    ++row_ptr_[e.row + 1];
    ++col_ptr_[e.col + 1];
  }
  for (Index i = 0; i < n; ++i) row_ptr_[i + 1] += row_ptr_[i];
  for (Index j = 0; j < m; ++j) col_ptr_[j + 1] += col_ptr_[j];

  row_idx_.resize(entries.size());
  row_val_.resize(entries.size());
  col_idx_.resize(entries.size());
  col_val_.resize(entries.size());
  std::vector<std::size_t> row_fill(row_ptr_.begin(), row_ptr_.end() - 1);
  std::vector<std::size_t> col_fill(col_ptr_.begin(), col_ptr_.end() - 1);
  for (const Entry& e : entries) {
    const std::size_t r = row_fill[e.row]++;
    row_idx_[r] = e.col;
    row_val_[r] = e.value;
    const std::size_t c = col_fill[e.col]++;
    col_idx_[c] = e.row;
    col_val_[c] = e.value;
  }
}

Matrix update_U(const Matrix& V, const Matrix& Z, const Matrix& Psi, const ObservationMasks& masks,
                double gamma, double rho2, ThreadPool* pool) {
  const Index n = masks.rows();
  const Index k = V.cols();
  require_shape(V, masks.cols(), k, "V");
  require_shape(Z, n, k, "Z");
  require_shape(Psi, n, k, "Psi");
  if (!(gamma + rho2 > 0.0)) throw ParameterError("update_U: gamma + rho2 must be > 0");

  const RowMatrix v = V;
  Matrix U(n, k);
  run_rows(pool, n, [&](Index begin, Index end) {
    Matrix G(k, k);
    linalg::Vector b(k);
    Eigen::LLT<Matrix> llt(k);
    for (Index i = begin; i < end; ++i) {
      G.setIdentity();
      G *= gamma + rho2;
      b = Psi.row(i).transpose() + rho2 * Z.row(i).transpose();
      for (std::size_t t = masks.row_begin(i); t < masks.row_begin(i + 1); ++t) {
        const auto vj = v.row(masks.row_col(t));
        G.noalias() += 2.0 * vj.transpose() * vj;
        b.noalias() += (2.0 * masks.row_value(t)) * vj.transpose();
      }
      llt.compute(G);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("update_U: Cholesky failed on row " + std::to_string(i));
      }
      U.row(i) = llt.solve(b).transpose();
    }
  });
  return U;
}

Matrix update_V(const Matrix& U, const ObservationMasks& masks, double gamma, ThreadPool* pool) {
  const Index m = masks.cols();
  const Index k = U.cols();
  require_shape(U, masks.rows(), k, "U");
  if (!(gamma > 0.0)) throw ParameterError("update_V: gamma must be > 0");

  const RowMatrix u = U;
  Matrix V(m, k);
  run_rows(pool, m, [&](Index begin, Index end) {
    Matrix G(k, k);
    linalg::Vector b(k);
    Eigen::LLT<Matrix> llt(k);
    for (Index j = begin; j < end; ++j) {
      G.setIdentity();
      G *= gamma;
      b.setZero();
      for (std::size_t t = masks.col_begin(j); t < masks.col_begin(j + 1); ++t) {
        const auto ui = u.row(masks.col_row(t));
        G.noalias() += 2.0 * ui.transpose() * ui;
        b.noalias() += (2.0 * masks.col_value(t)) * ui.transpose();
      }
      llt.compute(G);
      if (llt.info() != Eigen::Success) {
        throw NumericalError("update_V: Cholesky failed on row " + std::to_string(j));
      }
      V.row(j) = llt.solve(b).transpose();
    }
  });
  return V;
}

PUpdate update_P(const Matrix& Y, const Matrix& Z, const Matrix& Phi, double lambda, double rho1,
                 Index k) {
  const Index n = Y.rows();
  if (k < 1 || k > n) {
    throw ParameterError("update_P: k = " + std::to_string(k) + " outside [1, " +
                         std::to_string(n) + "]");
  }
  linalg::SymmetricEig eig = pgram_topk(Y, Z, Phi, lambda, rho1, k);
  return {std::move(eig.vectors), std::move(eig.values)};
}

Matrix update_Z(const Matrix& U, const Matrix& M, const Matrix& Phi, const Matrix& Psi,
                double rho1, double rho2) {
  if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw ParameterError("update_Z: rho1, rho2 must be > 0");
  require_shape(M, U.rows(), M.cols(), "M");
  require_shape(Phi, U.rows(), U.cols(), "Phi");
  require_shape(Psi, U.rows(), U.cols(), "Psi");
  const Matrix inside = Phi + rho1 * U - (rho1 / rho2) * Psi;
  Matrix Z = rho2 * U - Phi - Psi + linalg::apply_projection(M, inside);
  Z /= rho1 + rho2;
  return Z;
}

double phi_residual(const IterateState& s) {
  return (s.Z - linalg::apply_projection(s.M, s.Z)).norm();
}

double psi_residual(const IterateState& s) { return (s.Z - s.U).norm(); }

void update_duals(IterateState& s, double rho1, double rho2) {
  const Matrix off = s.Z - linalg::apply_projection(s.M, s.Z);
  s.Phi.noalias() += rho1 * off;
  s.Psi.noalias() += rho2 * (s.Z - s.U);
}

double augmented_lagrangian(const IterateState& s, const ObservationMasks& masks, const Matrix& Y,
                            const Hyperparams& hp) {
  const RowMatrix u = s.U;
  const RowMatrix v = s.V;
  double fit = 0.0;
  for (Index i = 0; i < masks.rows(); ++i) {
    for (std::size_t t = masks.row_begin(i); t < masks.row_begin(i + 1); ++t) {
      const double r = u.row(i).dot(v.row(masks.row_col(t))) - masks.row_value(t);
      fit += r * r;
    }
  }
  const double side = hp.lambda * (Y - s.M * (s.M.transpose() * Y)).squaredNorm();
  const double reg = 0.5 * hp.gamma * (s.U.squaredNorm() + s.V.squaredNorm());
  const Matrix off = s.Z - s.M * (s.M.transpose() * s.Z);
  const Matrix gap = s.Z - s.U;
  return fit + side + reg + (s.Phi.array() * off.array()).sum() +
         (s.Psi.array() * gap.array()).sum() + 0.5 * hp.rho1 * off.squaredNorm() +
         0.5 * hp.rho2 * gap.squaredNorm();
}

DualResidual dual_residual(const IterateState& s, const Matrix& Y, double lambda) {
  const Index k = s.Z.cols();
  const Matrix Q1 = linalg::orthonormal_basis(s.Z);
  const linalg::SymmetricEig top = pgram_topk(Y, s.Z, s.Phi, lambda, 0.0, k);
  DualResidual out;
  out.rank_deficient = Q1.cols() < k;
  out.value = (top.vectors - Q1 * (Q1.transpose() * top.vectors)).norm();
  return out;
}

bool FirstOrderReport::all() const {
  return std::all_of(std::begin(holds), std::end(holds), [](bool b) { return b; });
}

FirstOrderReport first_order_check(const IterateState& s, const ObservationMasks& masks,
                                   const Matrix& Y, double lambda, double gamma, double tol) {
  const Index k = s.U.cols();
  const RowMatrix u = s.U;
  const RowMatrix v = s.V;
  FirstOrderReport out;

  double ru = 0.0;
  for (Index i = 0; i < masks.rows(); ++i) {
    Matrix G = gamma * Matrix::Identity(k, k);
    linalg::Vector b = s.Psi.row(i).transpose();
    for (std::size_t t = masks.row_begin(i); t < masks.row_begin(i + 1); ++t) {
      const auto vj = v.row(masks.row_col(t));
      G.noalias() += 2.0 * vj.transpose() * vj;
      b.noalias() += (2.0 * masks.row_value(t)) * vj.transpose();
    }
    ru += (G * u.row(i).transpose() - b).squaredNorm();
  }
  double rv = 0.0;
  for (Index j = 0; j < masks.cols(); ++j) {
    Matrix G = gamma * Matrix::Identity(k, k);
    linalg::Vector b = linalg::Vector::Zero(k);
    for (std::size_t t = masks.col_begin(j); t < masks.col_begin(j + 1); ++t) {
      const auto ui = u.row(masks.col_row(t));
      G.noalias() += 2.0 * ui.transpose() * ui;
      b.noalias() += (2.0 * masks.col_value(t)) * ui.transpose();
    }
    rv += (G * v.row(j).transpose() - b).squaredNorm();
  }
  out.residual[0] = std::sqrt(ru);
  out.residual[1] = std::sqrt(rv);

  const linalg::SymmetricEig top = pgram_topk(Y, s.Z, s.Phi, lambda, 0.0, k);
  out.residual[2] = linalg::projector_distance(s.M, top.vectors);
  out.residual[3] = (s.Phi + s.Psi - linalg::apply_projection(s.M, s.Phi)).norm();
  out.residual[4] = (s.Z - linalg::apply_projection(s.M, s.Z)).norm();
  out.residual[5] = (s.Z - s.U).norm();
  for (int c = 0; c < 6; ++c) out.holds[c] = out.residual[c] <= tol;
  return out;
}

IterateState initial_state(const PartialMatrix& data, Index k, std::uint64_t seed) {
  if (k < 1 || k > std::min(data.rows(), data.cols())) {
    throw ParameterError("rank k = " + std::to_string(k) + " outside [1, min(n, m)]");
  }
  linalg::SpectralOptions opts;
  opts.seed = seed;
  linalg::TruncatedSVD svd;
  try {
    svd = linalg::truncated_svd(data.as_operator(), k, opts);
  } catch (const linalg::SvdConvergenceError& e) {
    // Only a starting point; the best subspace-iteration estimate is adequate.
    svd = e.best();
  }
  const linalg::Vector root = svd.S.cwiseMax(0.0).cwiseSqrt();
  IterateState s;
  s.U = svd.U * root.asDiagonal();
  s.V = svd.V * root.asDiagonal();
  s.M = svd.U;
  s.Z = s.U;
  s.Phi = Matrix::Ones(data.rows(), k);
  s.Psi = Matrix::Ones(data.rows(), k);
  return s;
}

SolveResult solve(const PartialMatrix& data, const Matrix& Y, const Hyperparams& hp,
                  const SolveOptions& options) {
  hp.validate();
  if (Y.rows() != data.rows()) {
    throw ParameterError("side information has " + std::to_string(Y.rows()) +
                         " rows, data has " + std::to_string(data.rows()));
  }
  if (!Y.allFinite()) throw ParameterError("side information contains non-finite values");

  const auto start = std::chrono::steady_clock::now();
  const ObservationMasks masks(data);
  ThreadPool pool(hp.threads);
  auto notify = [&](Block b, const IterateState& s, int t) {
    if (options.observer) options.observer(b, s, t);
  };

  SolveResult result;
  IterateState& s = result.state;
  SolveReport& rep = result.report;
  s = initial_state(data, hp.k, hp.seed);
  notify(Block::init, s, 0);

  for (int t = 1;; ++t) {
    {
      ScopedTimer timer(rep.times, Section::U);
      s.U = update_U(s.V, s.Z, s.Psi, masks, hp.gamma, hp.rho2, &pool);
    }
    require_finite(s.U, "U", t);
    notify(Block::U, s, t);
    {
      ScopedTimer timer(rep.times, Section::P);
      s.M = update_P(Y, s.Z, s.Phi, hp.lambda, hp.rho1, hp.k).M;
    }
    require_finite(s.M, "M", t);
    notify(Block::P, s, t);
    {
      ScopedTimer timer(rep.times, Section::V);
      s.V = update_V(s.U, masks, hp.gamma, &pool);
    }
    require_finite(s.V, "V", t);
    notify(Block::V, s, t);
    {
      ScopedTimer timer(rep.times, Section::Z);
      s.Z = update_Z(s.U, s.M, s.Phi, s.Psi, hp.rho1, hp.rho2);
    }
    require_finite(s.Z, "Z", t);
    notify(Block::Z, s, t);

    const double phi_res = phi_residual(s);
    const double psi_res = psi_residual(s);
    update_duals(s, hp.rho1, hp.rho2);
    require_finite(s.Phi, "Phi", t);
    require_finite(s.Psi, "Psi", t);
    notify(Block::duals, s, t);

    rep.iterations = t;
    rep.phi_residual_trace.push_back(phi_res);
    rep.psi_residual_trace.push_back(psi_res);
    if (options.track_objective) {
      rep.objective_trace.push_back(
          objective_svd_factored(s.U, s.V, data, Y, hp.lambda, hp.gamma).total);
    }
    if (options.track_dual_residual) {
      const DualResidual dr = dual_residual(s, Y, hp.lambda);
      rep.dual_residual_trace.push_back(dr.value);
      rep.rank_deficient_warning = rep.rank_deficient_warning || dr.rank_deficient;
    }

    if (std::max(phi_res * phi_res, psi_res * psi_res) <= hp.eps) {
      rep.termination = Termination::tolerance_met;
      break;
    }
    if (t >= hp.max_iter) {
      rep.termination = Termination::max_iters;
      break;
    }
  }
  rep.total_ms = elapsed_ms(start);
  return result;
}

}  // namespace mpadmm
