#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "mpadmm/model.hpp"
#include "mpadmm/objective.hpp"
#include "oracles.hpp"

using namespace mpadmm;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "mpadmm_model_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

std::size_t parse_error_line(const fs::path& p) {
  try {
    load_partial(p.string());
  } catch (const ParseError& e) {
    return e.line();
  }
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST(PartialMatrix, RejectsBadEntries) {
  EXPECT_THROW(PartialMatrix(2, 2, {{2, 0, 1.0}}), ParameterError);
  EXPECT_THROW(PartialMatrix(2, 2, {{0, -1, 1.0}}), ParameterError);
  EXPECT_THROW(PartialMatrix(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), ParameterError);
  EXPECT_THROW(PartialMatrix(2, 2, {{0, 0, std::nan("")}}), ParameterError);
}

TEST(PartialMatrix, FactoredFitMatchesDense) {
  oracle::Rng rng(1);
  std::vector<Entry> e{{0, 1, 1.5}, {2, 0, -0.5}, {1, 2, 2.0}};
  const PartialMatrix pm(3, 3, e);
  const Matrix U = rng.gaussian(3, 2), V = rng.gaussian(3, 2);
  EXPECT_NEAR(pm.fit_residual(U, V), pm.fit_residual(Matrix(U * V.transpose())), 1e-12);
}

TEST(Synthetic, NothingHidden) {
  const SyntheticInstance s = generate_synthetic(6, 5, 2, 3, 0.0, 1.0, 3);
  EXPECT_EQ(s.data.nnz(), 30u);
}

TEST(Synthetic, NoiselessSideInfo) {
  const SyntheticInstance s = generate_synthetic(12, 8, 2, 4, 0.5, 0.0, 4);
  EXPECT_LE((s.Y - s.truth.A * s.truth.beta).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Synthetic, ObservedCount) {
  const SyntheticInstance s = generate_synthetic(10, 8, 3, 2, 0.9, 2.0, 5);
  EXPECT_EQ(s.data.nnz(), 8u);
  const SyntheticInstance t = generate_synthetic(37, 23, 3, 2, 0.37, 2.0, 6);
  EXPECT_EQ(t.data.nnz() + static_cast<std::size_t>(std::floor(0.37 * 37 * 23)), 37u * 23u);
}

TEST(Synthetic, DistributionsAndRank) {
  const SyntheticInstance s = generate_synthetic(200, 60, 4, 10, 0.5, 0.0, 7);
  EXPECT_EQ(s.truth.beta.rows(), 60);
  EXPECT_GE(s.truth.beta.minCoeff(), 0.0);
  EXPECT_LE(s.truth.beta.maxCoeff(), 1.0);
  EXPECT_NEAR(s.truth.beta.mean(), 0.5, 0.05);
  const oracle::Svd sv = oracle::jacobi_svd(s.truth.A);
  Index rank = 0;
  for (Index i = 0; i < sv.S.size(); ++i) rank += sv.S(i) > 1e-8 * sv.S(0);
  EXPECT_EQ(rank, 4);
  for (const Entry& e : s.data.entries()) EXPECT_EQ(e.value, s.truth.A(e.row, e.col));
}

TEST(Synthetic, NoiseScale) {
  const SyntheticInstance s = generate_synthetic(300, 20, 2, 20, 0.5, 2.0, 8);
  const Matrix N = s.Y - s.truth.A * s.truth.beta;
  const double var = N.squaredNorm() / static_cast<double>(N.size());
  EXPECT_NEAR(std::sqrt(var), 2.0, 0.1);
}

TEST(Synthetic, Deterministic) {
  const SyntheticInstance a = generate_synthetic(30, 20, 3, 5, 0.8, 1.0, 9);
  const SyntheticInstance b = generate_synthetic(30, 20, 3, 5, 0.8, 1.0, 9);
  EXPECT_TRUE(a.data == b.data);
  EXPECT_EQ(a.Y, b.Y);
  EXPECT_EQ(a.truth.A, b.truth.A);
  const SyntheticInstance c = generate_synthetic(30, 20, 3, 5, 0.8, 1.0, 10);
  EXPECT_FALSE(a.data == c.data);
}

TEST(Synthetic, RankTooLargeThrows) {
  EXPECT_THROW(generate_synthetic(5, 4, 4, 2, 0.5, 1.0, 0), ParameterError);
  EXPECT_THROW(generate_synthetic(5, 4, 2, 2, 1.0, 1.0, 0), ParameterError);
}

TEST(Synthetic, ExactSolutionHasZeroFitAndSide) {
  const SyntheticInstance s = generate_synthetic(20, 12, 3, 4, 0.0, 0.0, 11);
  const ObjectiveBreakdown o = objective_svd(s.truth.A, s.data, s.Y, 1.0, 1.0);
  EXPECT_NEAR(o.fit_term, 0.0, 1e-20);
  EXPECT_LE(o.side_term, 1e-18 * s.Y.squaredNorm());
}

TEST(PartialIo, MinimalFile) {
  const fs::path p = temp_file("min.txt");
  write_text(p, "2 2 1\n1 2 3.5\n");
  const PartialMatrix pm = load_partial(p.string());
  EXPECT_EQ(pm.rows(), 2);
  EXPECT_EQ(pm.cols(), 2);
  ASSERT_EQ(pm.nnz(), 1u);
  EXPECT_EQ(pm.entries()[0].row, 0);
  EXPECT_EQ(pm.entries()[0].col, 1);
  EXPECT_EQ(pm.entries()[0].value, 3.5);
}

TEST(PartialIo, EmptyOmega) {
  const fs::path p = temp_file("empty.txt");
  write_text(p, "3 4 0\n");
  const PartialMatrix pm = load_partial(p.string());
  EXPECT_EQ(pm.nnz(), 0u);
  EXPECT_EQ(pm.rows(), 3);
  EXPECT_EQ(pm.cols(), 4);
}

TEST(PartialIo, RoundTripBitIdentical) {
  const SyntheticInstance s = generate_synthetic(50, 40, 3, 2, 0.6, 1.0, 12);
  const fs::path p = temp_file("rt.txt");
  save_partial(s.data, p.string());
  EXPECT_TRUE(load_partial(p.string()) == s.data);
}

TEST(PartialIo, ErrorsCarryLineNumbers) {
  const fs::path p = temp_file("bad.txt");
  write_text(p, "2 2 2\n1 1 1.0\n1 x 2.0\n");
  EXPECT_EQ(parse_error_line(p), 3u);
  write_text(p, "2 2 2\n1 1 1.0\n3 1 2.0\n");
  EXPECT_EQ(parse_error_line(p), 3u);
  write_text(p, "2 2 3\n1 1 1.0\n2 2 2.0\n1 1 5.0\n");
  EXPECT_EQ(parse_error_line(p), 4u);
  write_text(p, "2 2\n");
  EXPECT_EQ(parse_error_line(p), 1u);
  EXPECT_THROW(load_partial(temp_file("missing.txt").string()), ParseError);
}

TEST(SideInfoIo, SmallFiles) {
  const fs::path p = temp_file("y.csv");
  write_text(p, "2.0\n");
  Matrix y = load_side_info(p.string(), 1, 1);
  EXPECT_EQ(y(0, 0), 2.0);
  write_text(p, "1,0\n0,1\n");
  y = load_side_info(p.string(), 2, 2);
  EXPECT_EQ(y, Matrix::Identity(2, 2));
  EXPECT_THROW(load_side_info(p.string(), 3, 2), ParseError);
  EXPECT_THROW(load_side_info(p.string(), 2, 3), ParseError);
}

TEST(SideInfoIo, RoundTrip) {
  oracle::Rng rng(13);
  const Matrix y = rng.gaussian(30, 5);
  const fs::path p = temp_file("yrt.csv");
  save_side_info(y, p.string());
  EXPECT_EQ(load_side_info(p.string(), 30, 5), y);
}

TEST(Hyperparams, Validation) {
  Hyperparams h;
  EXPECT_NO_THROW(h.validate());
  h.gamma = 0.0;
  EXPECT_THROW(h.validate(), ParameterError);
  h = Hyperparams{};
  h.k = 0;
  EXPECT_THROW(h.validate(), ParameterError);
  h = Hyperparams{};
  h.rho1 = 0.0;
  EXPECT_THROW(h.validate(), ParameterError);
  h = Hyperparams{};
  h.max_iter = 0;
  EXPECT_THROW(h.validate(), ParameterError);
  h = Hyperparams{};
  h.lambda = -1.0;
  EXPECT_THROW(h.validate(), ParameterError);
}
