#pragma once

// Problem data: observed entries, side information, hyperparameters,
// synthetic instances and their text formats.

#include <cstdint>
#include <string>
#include <vector>

#include "mpadmm/linalg.hpp"

namespace mpadmm {

using linalg::Index;
using linalg::Matrix;
using linalg::Vector;

/// One observed entry, 0-based.
struct Entry {
  Index row;
  Index col;
  double value;
};

/// Observed entries of an n x m matrix. Entries are kept sorted by (row, col);
/// indices are 0-based in memory and 1-based in files.
class PartialMatrix {
 public:
  PartialMatrix() = default;

  /// Validates bounds, duplicates and finiteness; throws ParameterError.
  PartialMatrix(Index n, Index m, std::vector<Entry> entries);

  Index rows() const { return n_; }
  Index cols() const { return m_; }
  std::size_t nnz() const { return entries_.size(); }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Zero-filled dense copy.
  Matrix to_dense() const;

  /// Sum of squared observed values.
  double squared_norm() const;

  /// Sum over observed (i, j) of (X_ij - A_ij)^2.
  double fit_residual(const Matrix& X) const;

  /// Same, for X = Uf Vf^T without forming X.
  double fit_residual(const Matrix& Uf, const Matrix& Vf) const;

  /// Implicit zero-filled operator (products cost O(nnz * b)).
  linalg::LinearMap as_operator() const;

  bool operator==(const PartialMatrix& other) const;

 private:
  Index n_ = 0;
  Index m_ = 0;
  std::vector<Entry> entries_;
};

struct GroundTruth {
  Matrix A;
  Matrix beta;
  double noise_sigma = 0.0;
};

struct Hyperparams {
  Index k = 5;
  double lambda = 1.0;
  double gamma = 1.0;
  double rho1 = 10.0;
  double rho2 = 10.0;
  double eps = 1e-6;
  int max_iter = 20;
  std::size_t threads = 1;
  std::uint64_t seed = 0;

  /// Throws ParameterError naming the first offending field.
  void validate() const;
};

struct SyntheticInstance {
  PartialMatrix data;
  Matrix Y;
  GroundTruth truth;
};

/// U, V, beta ~ U[0, 1], N ~ normal(0, sigma^2), A = U V^T, Y = A beta + N,
/// and floor(miss_frac * n * m) entries hidden uniformly without replacement.
/// Draw order: U, V, beta, N (each row-major), then the hidden indices by a
/// partial Fisher-Yates shuffle of the row-major flattened grid.
SyntheticInstance generate_synthetic(Index n, Index m, Index k, Index d, double miss_frac,
                                     double sigma, std::uint64_t seed);

PartialMatrix load_partial(const std::string& path);
void save_partial(const PartialMatrix& pm, const std::string& path);

/// Header-free CSV. Pass -1 for rows/cols to accept any shape.
Matrix load_dense_csv(const std::string& path, Index rows = -1, Index cols = -1);
void save_dense_csv(const Matrix& X, const std::string& path);

/// Side information is an n x d CSV; the shape is checked.
inline Matrix load_side_info(const std::string& path, Index n, Index d) {
  return load_dense_csv(path, n, d);
}
inline void save_side_info(const Matrix& Y, const std::string& path) { save_dense_csv(Y, path); }

/// %.17g: enough significant digits to parse back to the same double.
std::string format_exact(double value);

}  // namespace mpadmm
