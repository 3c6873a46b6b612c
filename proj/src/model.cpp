#include "mpadmm/model.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "mpadmm/rng.hpp"

namespace mpadmm {

namespace {

bool parse_double(const std::string& token, double& out) {
  if (token.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(token.c_str(), &end);
  return end == token.c_str() + token.size() && errno != ERANGE;
}

bool parse_index(const std::string& token, long long& out) {
  if (token.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtoll(token.c_str(), &end, 10);
  return end == token.c_str() + token.size() && errno != ERANGE;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

PartialMatrix::PartialMatrix(Index n, Index m, std::vector<Entry> entries)
    : n_(n), m_(m), entries_(std::move(entries)) {
  if (n < 1 || m < 1) throw ParameterError("partial matrix dimensions must be positive");
  for (const Entry& e : entries_) {
    if (e.row < 0 || e.row >= n || e.col < 0 || e.col >= m) {
      throw ParameterError("entry (" + std::to_string(e.row + 1) + ", " +
                           std::to_string(e.col + 1) + ") out of bounds");
    }
    if (!std::isfinite(e.value)) {
      throw ParameterError("entry (" + std::to_string(e.row + 1) + ", " +
                           std::to_string(e.col + 1) + ") is not finite");
    }
  }
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t t = 1; t < entries_.size(); ++t) {
    if (entries_[t].row == entries_[t - 1].row && entries_[t].col == entries_[t - 1].col) {
      throw ParameterError("duplicate entry (" + std::to_string(entries_[t].row + 1) + ", " +
                           std::to_string(entries_[t].col + 1) + ")");
    }
  }
}

Matrix PartialMatrix::to_dense() const {
  Matrix a = Matrix::Zero(n_, m_);
  for (const Entry& e : entries_) a(e.row, e.col) = e.value;
  return a;
}

double PartialMatrix::squared_norm() const {
  double s = 0.0;
  for (const Entry& e : entries_) s += e.value * e.value;
  return s;
}

double PartialMatrix::fit_residual(const Matrix& X) const {
  if (X.rows() != n_ || X.cols() != m_) throw ParameterError("fit_residual: shape mismatch");
  double s = 0.0;
  for (const Entry& e : entries_) {
    const double r = X(e.row, e.col) - e.value;
    s += r * r;
  }
  return s;
}

double PartialMatrix::fit_residual(const Matrix& Uf, const Matrix& Vf) const {
  if (Uf.rows() != n_ || Vf.rows() != m_ || Uf.cols() != Vf.cols()) {
    throw ParameterError("fit_residual: factor shape mismatch");
  }
  // Row-major copies keep the per-entry dot products contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> u = Uf;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> v = Vf;
  double s = 0.0;
  for (const Entry& e : entries_) {
    const double r = u.row(e.row).dot(v.row(e.col)) - e.value;
    s += r * r;
  }
  return s;
}

linalg::LinearMap PartialMatrix::as_operator() const {
  auto entries = std::make_shared<const std::vector<Entry>>(entries_);
  const Index n = n_;
  const Index m = m_;
  return linalg::LinearMap(
      n, m,
      [entries, n](const Matrix& x) -> Matrix {
        Matrix out = Matrix::Zero(n, x.cols());
        for (Index c = 0; c < x.cols(); ++c)
          for (const Entry& e : *entries) out(e.row, c) += e.value * x(e.col, c);
        return out;
      },
      [entries, m](const Matrix& x) -> Matrix {
        Matrix out = Matrix::Zero(m, x.cols());
        for (Index c = 0; c < x.cols(); ++c)
          for (const Entry& e : *entries) out(e.col, c) += e.value * x(e.row, c);
        return out;
      });
}

bool PartialMatrix::operator==(const PartialMatrix& other) const {
  if (n_ != other.n_ || m_ != other.m_ || entries_.size() != other.entries_.size()) return false;
  for (std::size_t t = 0; t < entries_.size(); ++t) {
    const Entry& a = entries_[t];
    const Entry& b = other.entries_[t];
    if (a.row != b.row || a.col != b.col || a.value != b.value) return false;
  }
  return true;
}

void Hyperparams::validate() const {
  if (k < 1) throw ParameterError("rank k must be >= 1");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be >= 0");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ParameterError("gamma must be > 0");
  if (!(rho1 > 0.0) || !std::isfinite(rho1)) throw ParameterError("rho1 must be > 0");
  if (!(rho2 > 0.0) || !std::isfinite(rho2)) throw ParameterError("rho2 must be > 0");
  if (!(eps > 0.0)) throw ParameterError("tolerance eps must be > 0");
  if (max_iter < 1) throw ParameterError("max_iter must be >= 1");
  if (threads < 1) throw ParameterError("threads must be >= 1");
}

SyntheticInstance generate_synthetic(Index n, Index m, Index k, Index d, double miss_frac,
                                     double sigma, std::uint64_t seed) {
  if (n < 1 || m < 1 || d < 1) throw ParameterError("n, m, d must be >= 1");
  if (k < 1 || k >= std::min(n, m)) {
    throw ParameterError("k must satisfy 1 <= k < min(n, m), got " + std::to_string(k));
  }
  if (!(miss_frac >= 0.0 && miss_frac < 1.0)) throw ParameterError("miss_frac must be in [0, 1)");
  if (!(sigma >= 0.0)) throw ParameterError("sigma must be >= 0");

  Xoshiro256 rng(seed);
  auto fill_uniform = [&](Index r, Index c) {
    Matrix x(r, c);
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) x(i, j) = rng.uniform();
    return x;
  };
  const Matrix U = fill_uniform(n, k);
  const Matrix V = fill_uniform(m, k);
  const Matrix beta = fill_uniform(m, d);
  Matrix noise(n, d);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < d; ++j) noise(i, j) = sigma * rng.normal();

  SyntheticInstance out;
  out.truth.A = U * V.transpose();
  out.truth.beta = beta;
  out.truth.noise_sigma = sigma;
  out.Y = out.truth.A * beta + noise;

  const std::uint64_t total = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(m);
  const auto hidden = static_cast<std::uint64_t>(std::floor(miss_frac * static_cast<double>(total)));
  std::vector<std::uint64_t> perm(total);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::uint64_t t = 0; t < hidden; ++t) {
    const std::uint64_t pick = t + rng.bounded(total - t);
    std::swap(perm[t], perm[pick]);
  }
  std::vector<bool> is_hidden(total, false);
  for (std::uint64_t t = 0; t < hidden; ++t) is_hidden[perm[t]] = true;

  std::vector<Entry> entries;
  entries.reserve(total - hidden);
  for (std::uint64_t flat = 0; flat < total; ++flat) {
    if (is_hidden[flat]) continue;
    const auto i = static_cast<Index>(flat / static_cast<std::uint64_t>(m));
    const auto j = static_cast<Index>(flat % static_cast<std::uint64_t>(m));
    entries.push_back({i, j, out.truth.A(i, j)});
  }
  out.data = PartialMatrix(n, m, std::move(entries));
  return out;
}

std::string format_exact(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

PartialMatrix load_partial(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::string line;
  std::size_t lineno = 0;

  long long n = 0, m = 0, nnz = 0;
  for (;;) {
    if (!std::getline(in, line)) throw ParseError(path, lineno + 1, "missing header 'n m nnz'");
    ++lineno;
    line = strip_cr(line);
    if (!blank(line)) break;
  }
  {
    const auto tok = split_ws(line);
    if (tok.size() != 3 || !parse_index(tok[0], n) || !parse_index(tok[1], m) ||
        !parse_index(tok[2], nnz)) {
      throw ParseError(path, lineno, "expected header 'n m nnz'");
    }
    if (n < 1 || m < 1 || nnz < 0 || nnz > n * m) {
      throw ParseError(path, lineno, "invalid header values");
    }
  }

  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(nnz));
  std::vector<std::size_t> lines;
  lines.reserve(static_cast<std::size_t>(nnz));
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (blank(line)) continue;
    const auto tok = split_ws(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (tok.size() != 3 || !parse_index(tok[0], i) || !parse_index(tok[1], j) ||
        !parse_double(tok[2], v)) {
      throw ParseError(path, lineno, "expected 'i j value'");
    }
    if (i < 1 || i > n || j < 1 || j > m) throw ParseError(path, lineno, "index out of range");
    if (!std::isfinite(v)) throw ParseError(path, lineno, "value is not finite");
    if (static_cast<long long>(entries.size()) >= nnz) {
      throw ParseError(path, lineno, "more entries than the header declares");
    }
    entries.push_back({static_cast<Index>(i - 1), static_cast<Index>(j - 1), v});
    lines.push_back(lineno);
  }
  if (static_cast<long long>(entries.size()) != nnz) {
    throw ParseError(path, lineno, "header declares " + std::to_string(nnz) + " entries, found " +
                                       std::to_string(entries.size()));
  }

  // Report duplicates against the later of the two lines.
  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return entries[a].row != entries[b].row ? entries[a].row < entries[b].row
                                            : entries[a].col < entries[b].col;
  });
  for (std::size_t t = 1; t < order.size(); ++t) {
    const Entry& a = entries[order[t - 1]];
    const Entry& b = entries[order[t]];
    if (a.row == b.row && a.col == b.col) {
      throw ParseError(path, std::max(lines[order[t - 1]], lines[order[t]]), "duplicate index");
    }
  }
  return PartialMatrix(static_cast<Index>(n), static_cast<Index>(m), std::move(entries));
}

void save_partial(const PartialMatrix& pm, const std::string& path) {
  std::ofstream out = open_out(path);
  out << pm.rows() << ' ' << pm.cols() << ' ' << pm.nnz() << '\n';
  for (const Entry& e : pm.entries()) {
    out << (e.row + 1) << ' ' << (e.col + 1) << ' ' << format_exact(e.value) << '\n';
  }
  if (!out) throw ParameterError("write failed for '" + path + "'");
}

Matrix load_dense_csv(const std::string& path, Index rows, Index cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::vector<std::vector<double>> data;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (blank(line)) continue;
    std::vector<double> row;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos
                                                                       : comma - start);
      cell.erase(0, cell.find_first_not_of(" \t"));
      cell.erase(cell.find_last_not_of(" \t") + 1);
      double v = 0.0;
      if (!parse_double(cell, v) || !std::isfinite(v)) {
        throw ParseError(path, lineno, "invalid number '" + cell + "'");
      }
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!data.empty() && row.size() != data.front().size()) {
      throw ParseError(path, lineno, "expected " + std::to_string(data.front().size()) +
                                         " columns, found " + std::to_string(row.size()));
    }
    if (cols >= 0 && static_cast<Index>(row.size()) != cols) {
      throw ParseError(path, lineno, "expected " + std::to_string(cols) + " columns, found " +
                                         std::to_string(row.size()));
    }
    data.push_back(std::move(row));
  }
  if (rows >= 0 && static_cast<Index>(data.size()) != rows) {
    throw ParseError(path, lineno, "expected " + std::to_string(rows) + " rows, found " +
                                       std::to_string(data.size()));
  }
  const Index r = static_cast<Index>(data.size());
  const Index c = data.empty() ? std::max<Index>(cols, 0) : static_cast<Index>(data.front().size());
  Matrix X(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) X(i, j) = data[i][j];
  return X;
}

void save_dense_csv(const Matrix& X, const std::string& path) {
  std::ofstream out = open_out(path);
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_exact(X(i, j));
    }
    out << '\n';
  }
  if (!out) throw ParameterError("write failed for '" + path + "'");
}

}  // namespace mpadmm
