#include "mpadmm/bench.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "mpadmm/admm.hpp"
#include "mpadmm/baselines.hpp"
#include "mpadmm/objective.hpp"
#include "mpadmm/thread_pool.hpp"

namespace mpadmm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long long to_int(const std::string& v, const std::string& origin, std::size_t line) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') throw ParseError(origin, line, "expected an integer, got '" + v + "'");
  return x;
}

double to_real(const std::string& v, const std::string& origin, std::size_t line) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw ParseError(origin, line, "expected a number, got '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, const std::string& origin, std::size_t line) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParseError(origin, line, "expected true/false, got '" + v + "'");
}

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

std::string fmt_full(double x) {
  if (std::isnan(x)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string opt(const std::optional<double>& x) { return x ? fmt(*x) : ""; }

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::admm: return "admm";
    case Method::iterative_svd: return "iterative_svd";
    case Method::soft_impute: return "soft_impute";
    case Method::scaled_gd: break;
  }
  return "scaled_gd";
}

Method parse_method(const std::string& name) {
  if (name == "admm") return Method::admm;
  if (name == "iterative_svd" || name == "iterative-svd") return Method::iterative_svd;
  if (name == "soft_impute" || name == "soft-impute") return Method::soft_impute;
  if (name == "scaled_gd" || name == "scaled-gd") return Method::scaled_gd;
  throw ParameterError("unknown method '" + name + "'");
}

void SweepConfig::validate() const {
  if (varying != 'n' && varying != 'm' && varying != 'd' && varying != 'k') {
    throw ParameterError("varying must be one of n, m, d, k");
  }
  if (values.empty()) throw ParameterError("values must be non-empty");
  for (Index v : values) {
    if (v < 1) throw ParameterError("values must be positive");
  }
  if (trials < 1) throw ParameterError("trials must be >= 1");
  if (methods.empty()) throw ParameterError("methods must be non-empty");
  if (!(miss_frac >= 0.0 && miss_frac < 1.0)) throw ParameterError("miss_frac must be in [0, 1)");
  if (!(sigma >= 0.0)) throw ParameterError("sigma must be >= 0");
  Hyperparams h = hyper;
  h.k = k;
  h.validate();
}

SweepConfig parse_sweep_config(const std::string& text, const std::string& origin) {
  SweepConfig c;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(origin, lineno, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "varying") {
      if (val.size() != 1 || std::string("nmdk").find(val[0]) == std::string::npos) {
        throw ParseError(origin, lineno, "varying must be one of n, m, d, k");
      }
      c.varying = val[0];
    } else if (key == "values") {
      c.values.clear();
      for (const auto& v : split_list(val)) c.values.push_back(to_int(v, origin, lineno));
    } else if (key == "n") {
      c.n = to_int(val, origin, lineno);
    } else if (key == "m") {
      c.m = to_int(val, origin, lineno);
    } else if (key == "k") {
      c.k = to_int(val, origin, lineno);
    } else if (key == "d") {
      c.d = to_int(val, origin, lineno);
    } else if (key == "trials") {
      c.trials = static_cast<int>(to_int(val, origin, lineno));
    } else if (key == "methods") {
      c.methods.clear();
      for (const auto& v : split_list(val)) {
        try {
          c.methods.push_back(parse_method(v));
        } catch (const ParameterError& e) {
          throw ParseError(origin, lineno, e.what());
        }
      }
    } else if (key == "lambda") {
      c.hyper.lambda = to_real(val, origin, lineno);
    } else if (key == "gamma") {
      c.hyper.gamma = to_real(val, origin, lineno);
    } else if (key == "rho1") {
      c.hyper.rho1 = to_real(val, origin, lineno);
    } else if (key == "rho2") {
      c.hyper.rho2 = to_real(val, origin, lineno);
    } else if (key == "max_iter") {
      c.hyper.max_iter = static_cast<int>(to_int(val, origin, lineno));
    } else if (key == "tol") {
      c.hyper.eps = to_real(val, origin, lineno);
    } else if (key == "threads") {
      c.hyper.threads = static_cast<std::size_t>(to_int(val, origin, lineno));
    } else if (key == "miss_frac") {
      c.miss_frac = to_real(val, origin, lineno);
    } else if (key == "sigma") {
      c.sigma = to_real(val, origin, lineno);
    } else if (key == "base_seed") {
      c.base_seed = static_cast<std::uint64_t>(to_int(val, origin, lineno));
    } else if (key == "parallel_trials") {
      c.parallel_trials = to_bool(val, origin, lineno);
    } else if (key == "timings") {
      c.timings = to_bool(val, origin, lineno);
    } else {
      throw ParseError(origin, lineno, "unknown key '" + key + "'");
    }
  }
  return c;
}

SweepConfig load_sweep_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_sweep_config(buf.str(), path);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t value_index, std::size_t trial_index) {
  return base_seed * 1000000ULL + static_cast<std::uint64_t>(value_index) * 1000ULL +
         static_cast<std::uint64_t>(trial_index);
}

const std::vector<std::string>& trial_csv_header() {
  static const std::vector<std::string> header{
      "method", "n",       "m",       "k",       "d",       "seed",  "objective",
      "err_l2", "r2",      "fitted_rank", "time_ms", "t_U_ms", "t_V_ms", "t_P_ms",
      "t_Z_ms", "iters",   "phi_res", "psi_res", "dual_res"};
  return header;
}

double round_sig10(double x) {
  if (!std::isfinite(x)) return x;
  return std::strtod(fmt(x).c_str(), nullptr);
}

TrialRow run_trial(Method method, const SyntheticInstance& inst, const Hyperparams& hp,
                   std::uint64_t seed) {
  TrialRow row;
  row.method = method;
  row.n = inst.data.rows();
  row.m = inst.data.cols();
  row.k = hp.k;
  row.d = inst.Y.cols();
  row.seed = seed;
  try {
    Metrics metrics;
    switch (method) {
      case Method::admm: {
        Hyperparams h = hp;
        h.seed = seed;
        SolveOptions opts;
        opts.track_objective = false;
        opts.track_dual_residual = false;
        const SolveResult res = solve(inst.data, inst.Y, h, opts);
        metrics = evaluate_factored(res.state.U, res.state.V, inst.data, inst.Y, inst.truth.A,
                                    hp.lambda, hp.gamma);
        row.time_ms = res.report.total_ms;
        row.t_U_ms = res.report.times.U;
        row.t_V_ms = res.report.times.V;
        row.t_P_ms = res.report.times.P;
        row.t_Z_ms = res.report.times.Z;
        row.iters = res.report.iterations;
        row.phi_res = res.report.phi_residual_trace.back();
        row.psi_res = res.report.psi_residual_trace.back();
        row.dual_res = dual_residual(res.state, inst.Y, hp.lambda).value;
        break;
      }
      case Method::iterative_svd: {
        const BaselineResult res = iterative_svd(inst.data, hp.k);
        metrics = evaluate_dense(res.X_hat, inst.data, inst.Y, inst.truth.A, hp.lambda, hp.gamma);
        row.time_ms = res.wall_ms;
        row.iters = res.iterations;
        break;
      }
      case Method::soft_impute: {
        SoftImputeOptions so;
        so.k_cap = hp.k;
        const BaselineResult res = soft_impute(inst.data, so);
        metrics = evaluate_dense(res.X_hat, inst.data, inst.Y, inst.truth.A, hp.lambda, hp.gamma);
        row.time_ms = res.wall_ms;
        row.iters = res.iterations;
        break;
      }
      case Method::scaled_gd: {
        ScaledGdOptions so;
        so.seed = seed;
        const BaselineResult res = scaled_gd(inst.data, inst.Y, hp.lambda, hp.gamma, hp.k, so);
        metrics = evaluate_factored(res.U, res.V, inst.data, inst.Y, inst.truth.A, hp.lambda,
                                    hp.gamma);
        row.time_ms = res.wall_ms;
        row.iters = res.iterations;
        break;
      }
    }
    row.objective = metrics.objective.total;
    row.err_l2 = metrics.err_l2;
    row.r2 = metrics.r2;
    row.fitted_rank = metrics.fitted_rank;
    const bool finite = std::isfinite(row.objective) && std::isfinite(row.err_l2) &&
                        std::isfinite(row.r2);
    if (!finite) throw NumericalError("non-finite metric");
  } catch (const std::exception& e) {
    TrialRow failed;
    failed.method = method;
    failed.n = row.n;
    failed.m = row.m;
    failed.k = row.k;
    failed.d = row.d;
    failed.seed = seed;
    failed.failed = true;
    failed.error = e.what();
    return failed;
  }
  // Keep exactly what is written so aggregates agree with the file.
  row.objective = round_sig10(row.objective);
  row.err_l2 = round_sig10(row.err_l2);
  row.r2 = round_sig10(row.r2);
  row.time_ms = round_sig10(row.time_ms);
  for (auto* f : {&row.t_U_ms, &row.t_V_ms, &row.t_P_ms, &row.t_Z_ms, &row.phi_res,
                  &row.psi_res, &row.dual_res}) {
    if (*f) *f = round_sig10(**f);
  }
  return row;
}

std::string summary_path(const std::string& out_path) {
  const std::string suffix = ".csv";
  std::string stem = out_path;
  if (stem.size() >= suffix.size() &&
      stem.compare(stem.size() - suffix.size(), suffix.size(), suffix) == 0) {
    stem.erase(stem.size() - suffix.size());
  }
  return stem + ".summary.csv";
}

SweepSummary run_sweep(const SweepConfig& config, const std::string& out_path) {
  config.validate();

  struct Task {
    std::size_t value_index;
    std::size_t trial;
  };
  std::vector<Task> tasks;
  for (std::size_t v = 0; v < config.values.size(); ++v)
    for (int t = 0; t < config.trials; ++t) tasks.push_back({v, static_cast<std::size_t>(t)});

  const std::size_t per_task = config.methods.size();
  std::vector<TrialRow> rows(tasks.size() * per_task);

  auto run_task = [&](std::size_t index) {
    const Task& task = tasks[index];
    SweepConfig c = config;
    const Index value = config.values[task.value_index];
    switch (config.varying) {
      case 'n': c.n = value; break;
      case 'm': c.m = value; break;
      case 'd': c.d = value; break;
      default: c.k = value; break;
    }
    const std::uint64_t seed = trial_seed(config.base_seed, task.value_index, task.trial);
    Hyperparams hp = config.hyper;
    hp.k = c.k;
    std::vector<TrialRow> local;
    try {
      const SyntheticInstance inst =
          generate_synthetic(c.n, c.m, c.k, c.d, c.miss_frac, c.sigma, seed);
      for (Method method : config.methods) local.push_back(run_trial(method, inst, hp, seed));
    } catch (const std::exception& e) {
      local.clear();
      for (Method method : config.methods) {
        TrialRow r;
        r.method = method;
        r.n = c.n;
        r.m = c.m;
        r.k = c.k;
        r.d = c.d;
        r.seed = seed;
        r.failed = true;
        r.error = e.what();
        local.push_back(r);
      }
    }
    for (std::size_t j = 0; j < per_task; ++j) {
      local[j].value_index = task.value_index;
      rows[index * per_task + j] = std::move(local[j]);
    }
  };

  if (config.parallel_trials && tasks.size() > 1) {
    ThreadPool pool(std::min<std::size_t>(default_thread_count(), tasks.size()));
    pool.parallel_for(tasks.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) run_task(i);
    });
  } else {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
  }

  SweepSummary summary;
  summary.timings_reliable = !config.parallel_trials;

  {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw ParameterError("cannot open '" + out_path + "' for writing");
    const auto& header = trial_csv_header();
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const TrialRow& r : rows) {
      out << to_string(r.method) << ',' << r.n << ',' << r.m << ',' << r.k << ',' << r.d << ','
          << r.seed << ',';
      if (r.failed) {
        out << "error,,,,,,,,,,,,\n";
        continue;
      }
      const bool t = config.timings;
      out << fmt(r.objective) << ',' << fmt(r.err_l2) << ',' << fmt(r.r2) << ','
          << r.fitted_rank << ',' << (t ? fmt(r.time_ms) : "") << ','
          << (t ? opt(r.t_U_ms) : "") << ',' << (t ? opt(r.t_V_ms) : "") << ','
          << (t ? opt(r.t_P_ms) : "") << ',' << (t ? opt(r.t_Z_ms) : "") << ',' << r.iters << ','
          << opt(r.phi_res) << ',' << opt(r.psi_res) << ',' << opt(r.dual_res) << '\n';
    }
    if (!out) throw ParameterError("write failed for '" + out_path + "'");
  }

  // Per-(method, value) means over successful trials, in value-then-method order.
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t v = 0; v < config.values.size(); ++v) {
    for (Method method : config.methods) {
      CellMean cell;
      cell.method = method;
      cell.value = config.values[v];
      double tu = 0, tv = 0, tp = 0, tz = 0, pr = 0, sr = 0, dr = 0;
      bool admm_fields = false;
      for (const TrialRow& r : rows) {
        if (r.value_index != v || r.method != method) continue;
        if (r.failed) {
          ++cell.failed;
          continue;
        }
        ++cell.ok;
        cell.objective += r.objective;
        cell.err_l2 += r.err_l2;
        cell.r2 += r.r2;
        cell.fitted_rank += static_cast<double>(r.fitted_rank);
        cell.time_ms += r.time_ms;
        cell.iters += r.iters;
        if (r.t_U_ms) {
          admm_fields = true;
          tu += *r.t_U_ms;
          tv += *r.t_V_ms;
          tp += *r.t_P_ms;
          tz += *r.t_Z_ms;
          pr += *r.phi_res;
          sr += *r.psi_res;
          dr += *r.dual_res;
        }
      }
      const double cnt = cell.ok > 0 ? static_cast<double>(cell.ok) : nan;
      cell.objective /= cnt;
      cell.err_l2 /= cnt;
      cell.r2 /= cnt;
      cell.fitted_rank /= cnt;
      cell.time_ms /= cnt;
      cell.iters /= cnt;
      cell.t_U_ms = admm_fields ? tu / cnt : nan;
      cell.t_V_ms = admm_fields ? tv / cnt : nan;
      cell.t_P_ms = admm_fields ? tp / cnt : nan;
      cell.t_Z_ms = admm_fields ? tz / cnt : nan;
      cell.phi_res = admm_fields ? pr / cnt : nan;
      cell.psi_res = admm_fields ? sr / cnt : nan;
      cell.dual_res = admm_fields ? dr / cnt : nan;
      summary.cells.push_back(cell);
    }
  }

  {
    const std::string path = summary_path(out_path);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParameterError("cannot open '" + path + "' for writing");
    out << "method,varying,value,trials_ok,trials_failed,objective,err_l2,r2,fitted_rank,"
           "time_ms,t_U_ms,t_V_ms,t_P_ms,t_Z_ms,iters,phi_res,psi_res,dual_res,timings_reliable\n";
    const bool t = config.timings;
    for (const CellMean& c : summary.cells) {
      out << to_string(c.method) << ',' << config.varying << ',' << c.value << ',' << c.ok << ','
          << c.failed << ',' << fmt_full(c.objective) << ',' << fmt_full(c.err_l2) << ','
          << fmt_full(c.r2) << ',' << fmt_full(c.fitted_rank) << ','
          << (t ? fmt_full(c.time_ms) : "") << ',' << (t ? fmt_full(c.t_U_ms) : "") << ','
          << (t ? fmt_full(c.t_V_ms) : "") << ',' << (t ? fmt_full(c.t_P_ms) : "") << ','
          << (t ? fmt_full(c.t_Z_ms) : "") << ',' << fmt_full(c.iters) << ','
          << fmt_full(c.phi_res) << ',' << fmt_full(c.psi_res) << ',' << fmt_full(c.dual_res)
          << ',' << (t ? (summary.timings_reliable ? "true" : "false") : "") << '\n';
    }
    if (!out) throw ParameterError("write failed for '" + path + "'");
  }

  summary.rows = std::move(rows);
  return summary;
}

}  // namespace mpadmm
