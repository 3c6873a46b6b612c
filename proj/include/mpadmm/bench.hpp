#pragma once

// Sensitivity sweeps over one of n, m, d, k on synthetic instances. Each
// (value, trial) pair draws a fresh instance and runs every requested method.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mpadmm/model.hpp"

namespace mpadmm {

enum class Method { admm, iterative_svd, soft_impute, scaled_gd };

const char* to_string(Method m);
/// Accepts "admm", "iterative_svd"/"iterative-svd", "soft_impute"/"soft-impute",
/// "scaled_gd"/"scaled-gd". Throws ParameterError otherwise.
Method parse_method(const std::string& name);

struct SweepConfig {
  char varying = 'n';  ///< one of n, m, d, k
  std::vector<Index> values;
  Index n = 1000;
  Index m = 100;
  Index k = 5;
  Index d = 150;
  int trials = 1;
  std::vector<Method> methods{Method::admm};
  Hyperparams hyper;
  double miss_frac = 0.9;
  double sigma = 2.0;
  std::uint64_t base_seed = 0;
  /// Run trials concurrently; timings are then marked unreliable.
  bool parallel_trials = false;
  /// Write timing columns. Disable for byte-reproducible output.
  bool timings = true;

  void validate() const;
};

/// Flat key=value lines; '#' starts a comment; lists are comma-separated.
/// Keys: varying, values, n, m, k, d, trials, methods, lambda, gamma, rho1,
/// rho2, max_iter, tol, threads, miss_frac, sigma, base_seed,
/// parallel_trials, timings.
SweepConfig parse_sweep_config(const std::string& text, const std::string& origin = "<config>");
SweepConfig load_sweep_config(const std::string& path);

/// seed = base_seed * 10^6 + value_index * 10^3 + trial_index.
std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t value_index, std::size_t trial_index);

struct TrialRow {
  Method method = Method::admm;
  Index n = 0, m = 0, k = 0, d = 0;
  std::uint64_t seed = 0;
  std::size_t value_index = 0;
  bool failed = false;
  std::string error;  ///< message when failed (not written to the CSV)
  double objective = 0.0;
  double err_l2 = 0.0;
  double r2 = 0.0;
  Index fitted_rank = 0;
  double time_ms = 0.0;
  /// ADMM only.
  std::optional<double> t_U_ms, t_V_ms, t_P_ms, t_Z_ms;
  int iters = 0;
  std::optional<double> phi_res, psi_res, dual_res;
};

struct CellMean {
  Method method = Method::admm;
  Index value = 0;
  int ok = 0;
  int failed = 0;
  double objective = 0.0;
  double err_l2 = 0.0;
  double r2 = 0.0;
  double fitted_rank = 0.0;
  double time_ms = 0.0;
  double iters = 0.0;
  /// ADMM only (NaN otherwise).
  double t_U_ms = 0.0, t_V_ms = 0.0, t_P_ms = 0.0, t_Z_ms = 0.0;
  double phi_res = 0.0, psi_res = 0.0, dual_res = 0.0;
};

struct SweepSummary {
  std::vector<TrialRow> rows;
  std::vector<CellMean> cells;
  bool timings_reliable = true;
};

/// Column names of the trial CSV, in order.
const std::vector<std::string>& trial_csv_header();

/// Numbers are written with 10 significant digits; stored row values are
/// rounded the same way so that aggregates match the file.
double round_sig10(double x);

/// One method on one instance. Failures are captured in the row.
TrialRow run_trial(Method method, const SyntheticInstance& inst, const Hyperparams& hp,
                   std::uint64_t seed);

/// Runs the sweep, writes out_path and <out_path without .csv>.summary.csv.
SweepSummary run_sweep(const SweepConfig& config, const std::string& out_path);

/// Path of the summary file written next to out_path.
std::string summary_path(const std::string& out_path);

}  // namespace mpadmm
