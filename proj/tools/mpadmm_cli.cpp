// mpadmm: generate synthetic instances, solve them, run sweeps, evaluate saved solutions.
//
// Exit status: 0 success, 1 bad flags/parameters/files, 2 numerical or convergence failure.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "mpadmm/admm.hpp"
#include "mpadmm/baselines.hpp"
#include "mpadmm/bench.hpp"
#include "mpadmm/objective.hpp"
#include "mpadmm/thread_pool.hpp"

namespace fs = std::filesystem;
using namespace mpadmm;

namespace {

struct GenArgs {
  Index n = 1000, m = 100, k = 5, d = 150;
  double miss_frac = 0.9;
  double sigma = 2.0;
  std::uint64_t seed = 0;
  std::string out = ".";
};

struct SolveArgs {
  std::string method = "admm";
  Hyperparams hp;
  std::string data, side_info, truth;
  std::string out = ".";
};

struct EvalArgs {
  std::string data, side_info, truth, u, v, xhat;
  double lambda = 1.0;
  double gamma = 1.0;
  std::string out;
};

struct SweepArgs {
  std::string config;
  std::string out;
  bool no_timings = false;
  bool parallel = false;
};

fs::path ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ParameterError("--out: cannot create directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

void require_file(const std::string& flag, const std::string& path) {
  if (!fs::is_regular_file(path)) throw ParameterError(flag + ": no such file '" + path + "'");
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot open '" + path.string() + "' for writing");
  return out;
}

void write_metrics(const Metrics& mt, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "objective,fit_term,side_term,reg_term,err_l2,r2,fitted_rank\n";
  out << format_exact(mt.objective.total) << ',' << format_exact(mt.objective.fit_term) << ','
      << format_exact(mt.objective.side_term) << ',' << format_exact(mt.objective.reg_term)
      << ',' << (std::isnan(mt.err_l2) ? std::string() : format_exact(mt.err_l2)) << ','
      << format_exact(mt.r2) << ',' << mt.fitted_rank << '\n';
}

void print_metrics(const Metrics& mt) {
  std::printf("objective   %.10g\n", mt.objective.total);
  if (!std::isnan(mt.err_l2)) std::printf("err_l2      %.10g\n", mt.err_l2);
  std::printf("r2          %.10g\n", mt.r2);
  std::printf("fitted_rank %lld\n", static_cast<long long>(mt.fitted_rank));
}

// Dense estimate -> balanced factors L S^1/2, R S^1/2.
void factor_dense(const Matrix& X, Matrix& U, Matrix& V) {
  const linalg::TruncatedSVD svd = linalg::compact_svd(X);
  const linalg::Vector root = svd.S.cwiseSqrt();
  U = svd.U * root.asDiagonal();
  V = svd.V * root.asDiagonal();
}

int run_gen(const GenArgs& a) {
  const SyntheticInstance inst = generate_synthetic(a.n, a.m, a.k, a.d, a.miss_frac, a.sigma, a.seed);
  const fs::path dir = ensure_dir(a.out);
  save_partial(inst.data, (dir / "data.txt").string());
  save_side_info(inst.Y, (dir / "side_info.csv").string());
  save_dense_csv(inst.truth.A, (dir / "truth.csv").string());
  std::printf("wrote %s, %s, %s\n", (dir / "data.txt").c_str(), (dir / "side_info.csv").c_str(),
              (dir / "truth.csv").c_str());
  return 0;
}

int run_solve(const SolveArgs& a) {
  require_file("--data", a.data);
  require_file("--side-info", a.side_info);
  if (!a.truth.empty()) require_file("--truth", a.truth);
  a.hp.validate();
  const Method method = parse_method(a.method);
  const PartialMatrix data = load_partial(a.data);
  const Matrix Y = load_dense_csv(a.side_info, data.rows(), -1);
  const Matrix A_true =
      a.truth.empty() ? Matrix() : load_dense_csv(a.truth, data.rows(), data.cols());
  const fs::path dir = ensure_dir(a.out);

  Matrix U, V;
  std::ofstream report = open_out(dir / "report.csv");
  switch (method) {
    case Method::admm: {
      const SolveResult res = solve(data, Y, a.hp);
      U = res.state.U;
      V = res.state.V;
      const SolveReport& r = res.report;
      report << "iter,phi_res,psi_res,dual_res,objective,termination\n";
      for (int t = 0; t < r.iterations; ++t) {
        report << (t + 1) << ',' << format_exact(r.phi_residual_trace[t]) << ','
               << format_exact(r.psi_residual_trace[t]) << ','
               << format_exact(r.dual_residual_trace[t]) << ','
               << format_exact(r.objective_trace[t]) << ',' << to_string(r.termination) << '\n';
      }
      std::printf("admm: %d iterations, %s, %.1f ms (U %.1f, V %.1f, P %.1f, Z %.1f)\n",
                  r.iterations, to_string(r.termination), r.total_ms, r.times.U, r.times.V,
                  r.times.P, r.times.Z);
      if (r.rank_deficient_warning) std::fprintf(stderr, "warning: Z lost rank during the run\n");
      break;
    }
    case Method::iterative_svd:
    case Method::soft_impute:
    case Method::scaled_gd: {
      BaselineResult res;
      if (method == Method::iterative_svd) {
        res = iterative_svd(data, a.hp.k);
      } else if (method == Method::soft_impute) {
        SoftImputeOptions so;
        so.k_cap = a.hp.k;
        res = soft_impute(data, so);
      } else {
        ScaledGdOptions so;
        so.seed = a.hp.seed;
        res = scaled_gd(data, Y, a.hp.lambda, a.hp.gamma, a.hp.k, so);
      }
      if (res.factored()) {
        U = res.U;
        V = res.V;
      } else {
        factor_dense(res.X_hat, U, V);
      }
      report << "iter,trace,termination\n";
      for (std::size_t t = 0; t < res.trace.size(); ++t) {
        report << t << ',' << format_exact(res.trace[t]) << ',' << to_string(res.termination)
               << '\n';
      }
      std::printf("%s: %d iterations, %s, %.1f ms\n", to_string(method), res.iterations,
                  to_string(res.termination), res.wall_ms);
      break;
    }
  }
  save_dense_csv(U, (dir / "U.csv").string());
  save_dense_csv(V, (dir / "V.csv").string());
  const Metrics mt = evaluate_factored(U, V, data, Y, A_true, a.hp.lambda, a.hp.gamma);
  write_metrics(mt, dir / "metrics.csv");
  print_metrics(mt);
  return 0;
}

int run_eval(const EvalArgs& a) {
  require_file("--data", a.data);
  require_file("--side-info", a.side_info);
  const bool dense = !a.xhat.empty();
  if (dense == (!a.u.empty() || !a.v.empty())) {
    throw ParameterError("eval: pass either --xhat or both --u and --v");
  }
  if (!dense && (a.u.empty() || a.v.empty())) throw ParameterError("eval: --u and --v go together");
  if (!(a.lambda >= 0.0)) throw ParameterError("--lambda must be >= 0");
  if (!(a.gamma > 0.0)) throw ParameterError("--gamma must be > 0");
  const PartialMatrix data = load_partial(a.data);
  const Matrix Y = load_dense_csv(a.side_info, data.rows(), -1);
  Matrix A_true;
  if (!a.truth.empty()) {
    require_file("--truth", a.truth);
    A_true = load_dense_csv(a.truth, data.rows(), data.cols());
  }
  Metrics mt;
  if (dense) {
    require_file("--xhat", a.xhat);
    const Matrix X = load_dense_csv(a.xhat, data.rows(), data.cols());
    mt = evaluate_dense(X, data, Y, A_true, a.lambda, a.gamma);
  } else {
    require_file("--u", a.u);
    require_file("--v", a.v);
    const Matrix U = load_dense_csv(a.u, data.rows(), -1);
    const Matrix V = load_dense_csv(a.v, data.cols(), U.cols());
    mt = evaluate_factored(U, V, data, Y, A_true, a.lambda, a.gamma);
  }
  if (!a.out.empty()) write_metrics(mt, ensure_dir(a.out) / "metrics.csv");
  print_metrics(mt);
  return 0;
}

int run_sweep_cmd(const SweepArgs& a) {
  require_file("--config", a.config);
  SweepConfig cfg = load_sweep_config(a.config);
  if (a.no_timings) cfg.timings = false;
  if (a.parallel) cfg.parallel_trials = true;
  const SweepSummary s = run_sweep(cfg, a.out);
  std::size_t failed = 0;
  for (const TrialRow& r : s.rows) {
    if (r.failed) {
      ++failed;
      std::fprintf(stderr, "trial failed: %s seed %llu: %s\n", to_string(r.method),
                   static_cast<unsigned long long>(r.seed), r.error.c_str());
    }
  }
  std::printf("wrote %zu rows (%zu failed) to %s and %s\n", s.rows.size(), failed, a.out.c_str(),
              summary_path(a.out).c_str());
  return 0;
}

void add_hyper_flags(CLI::App* cmd, Hyperparams& hp) {
  cmd->add_option("--rank", hp.k, "target rank k")->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", hp.lambda, "side-information weight");
  cmd->add_option("--gamma", hp.gamma, "nuclear-norm weight");
  cmd->add_option("--rho1", hp.rho1, "penalty on (I - P) Z");
  cmd->add_option("--rho2", hp.rho2, "penalty on Z - U");
  cmd->add_option("--max-iter", hp.max_iter, "iteration cap T");
  cmd->add_option("--tol", hp.eps, "stopping tolerance on squared primal residuals");
  cmd->add_option("--threads", hp.threads, "worker threads (default: cores, at most 24)");
  cmd->add_option("--seed", hp.seed, "seed for the randomized initial SVD");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive low-rank matrix completion with side information"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a synthetic instance");
  gen_cmd->add_option("--n", gen.n, "rows")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--m", gen.m, "columns")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--k", gen.k, "true rank")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--d", gen.d, "side-information columns")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--miss-frac", gen.miss_frac, "fraction of hidden entries");
  gen_cmd->add_option("--sigma", gen.sigma, "side-information noise level");
  gen_cmd->add_option("--seed", gen.seed, "generator seed");
  gen_cmd->add_option("--out", gen.out, "output directory");

  SolveArgs sol;
  sol.hp.threads = default_thread_count();
  auto* solve_cmd = app.add_subcommand("solve", "solve one instance");
  solve_cmd->add_option("--method", sol.method, "admm | iterative-svd | soft-impute | scaled-gd");
  add_hyper_flags(solve_cmd, sol.hp);
  solve_cmd->add_option("--data", sol.data, "partial matrix file")->required();
  solve_cmd->add_option("--side-info", sol.side_info, "side-information CSV")->required();
  solve_cmd->add_option("--truth", sol.truth, "ground-truth CSV (optional)");
  solve_cmd->add_option("--out", sol.out, "output directory");

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "run a parameter sweep");
  sweep_cmd->add_option("--config", sw.config, "key=value sweep file")->required();
  sweep_cmd->add_option("--out", sw.out, "trial CSV path")->required();
  sweep_cmd->add_flag("--no-timings", sw.no_timings, "omit timing columns");
  sweep_cmd->add_flag("--parallel-trials", sw.parallel, "run trials concurrently");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "recompute metrics for a saved solution");
  eval_cmd->add_option("--data", ev.data, "partial matrix file")->required();
  eval_cmd->add_option("--side-info", ev.side_info, "side-information CSV")->required();
  eval_cmd->add_option("--truth", ev.truth, "ground-truth CSV (optional)");
  eval_cmd->add_option("--u", ev.u, "U factor CSV");
  eval_cmd->add_option("--v", ev.v, "V factor CSV");
  eval_cmd->add_option("--xhat", ev.xhat, "dense estimate CSV");
  eval_cmd->add_option("--lambda", ev.lambda, "side-information weight");
  eval_cmd->add_option("--gamma", ev.gamma, "nuclear-norm weight");
  eval_cmd->add_option("--out", ev.out, "directory for metrics.csv (optional)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*gen_cmd) return run_gen(gen);
    if (*solve_cmd) return run_solve(sol);
    if (*sweep_cmd) return run_sweep_cmd(sw);
    if (*eval_cmd) return run_eval(ev);
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return 2;
  } catch (const ConvergenceError& e) {
    std::fprintf(stderr, "convergence error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
