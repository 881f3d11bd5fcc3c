#pragma once

// End-to-end orchestration: the full identification pass over one record,
// and the seeded Monte-Carlo benchmark harness with its file outputs.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "netid/arx.hpp"
#include "netid/glasso.hpp"
#include "netid/io.hpp"
#include "netid/simulate.hpp"
#include "netid/topology.hpp"
#include "netid/wnsf.hpp"

namespace netid {

/// The order schedule used by the experiments, interpolated in log N for
/// record lengths off the anchor grid and clamped to [10, 40].
inline int default_order_for(long N) {
  static const double anchor_n[] = {300, 1078, 3873, 13916, 50000};
  static const double anchor_ord[] = {10, 20, 30, 40, 40};
  if (N <= anchor_n[0]) return 10;
  if (N >= anchor_n[4]) return 40;
  const double x = std::log(static_cast<double>(N));
  for (int i = 0; i < 4; ++i) {
    const double x0 = std::log(anchor_n[i]);
    const double x1 = std::log(anchor_n[i + 1]);
    if (x <= x1) {
      const double f = (x - x0) / (x1 - x0);
      return static_cast<int>(std::lround(anchor_ord[i] + f * (anchor_ord[i + 1] - anchor_ord[i])));
    }
  }
  return 40;
}

struct IdentifyOptions {
  int n = 0;  // 0 selects the schedule default for the record length
  std::string topology_method = "glasso";  // aic | bic | cv | glasso | true
  BjOrders orders{};
  bool use_true_noise = false;
  bool weighted_initial = true;
  bool glasso_penalize_g = true;
  std::vector<double> lambda_grid = default_lambda_grid();
  double iterate_tol = 1e-4;
  int max_iter = 50;
  int expected_p = 0;  // nonzero: abort when the rank estimate differs
};

struct Alg1Result {
  int n = 0;
  RankResult rank;
  Eigen::MatrixXd lambda_hat;
  TopologyEstimate topo;
  BjEstimate bj;
  Eigen::MatrixXd lambda_a;  // innovation covariance of the leading block
  nlohmann::json diagnostics;
};

namespace detail {

inline nlohmann::json diag_to_json(const FitDiagnostics& d) {
  nlohmann::json j;
  j["residual_variance"] = d.residual_variance;
  j["n_params"] = d.n_params;
  j["condition"] = d.cond_max;
  j["rank_deficient"] = d.rank_deficient;
  if (d.ridge > 0.0) j["ridge"] = d.ridge;
  return j;
}

inline bool is_identity(const std::vector<int>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i)
    if (perm[i] != static_cast<int>(i)) return false;
  return true;
}

}  // namespace detail

/// Estimates the disturbance topology for every node on a prepared context.
inline TopologyEstimate estimate_topology(const PredictorContext& ctx, const PredictorTopology& known,
                                          const std::string& method, const IdentifyOptions& opt,
                                          nlohmann::json* diag = nullptr) {
  TopologyEstimate topo;
  topo.L = ctx.data().L();
  topo.p = ctx.p();
  topo.method = method;
  topo.v_sets.resize(static_cast<std::size_t>(topo.L));
  topo.score_table.resize(static_cast<std::size_t>(topo.L));
  for (int j = 0; j < topo.L; ++j) {
    const auto& w_set = known.w_in[static_cast<std::size_t>(j)];
    if (method == "glasso") {
      GlassoOptions gopt;
      gopt.penalize_g = opt.glasso_penalize_g;
      const LambdaChoice choice = tune_lambda(ctx, j, w_set, opt.lambda_grid, gopt);
      topo.v_sets[static_cast<std::size_t>(j)] = choice.v_set;
      for (const auto& [lam, vset, rmse] : choice.table)
        topo.score_table[static_cast<std::size_t>(j)].push_back({vset, rmse});
      if (diag) (*diag)["lambda"].push_back(choice.lambda);
    } else {
      SelectionCriterion crit = SelectionCriterion::kBic;
      if (method == "aic") crit = SelectionCriterion::kAic;
      else if (method == "cv") crit = SelectionCriterion::kCv;
      else if (method != "bic") throw StructuralError("estimate_topology: unknown method '" + method + "'");
      auto [v_set, table] = select_structure(ctx, j, w_set, crit);
      topo.v_sets[static_cast<std::size_t>(j)] = std::move(v_set);
      topo.score_table[static_cast<std::size_t>(j)] = std::move(table);
    }
  }
  return topo;
}

/// The full multi-step identification pass: rank and reordering, the refined
/// ARX with known excitation block, topology detection, the structured
/// high-order refit, and the parametric reduction with weighted iterations.
inline Alg1Result run_algorithm1(const Dataset& data_in, const NetworkModel& known_in, const IdentifyOptions& opt) {
  Alg1Result res;
  res.n = opt.n > 0 ? opt.n : default_order_for(data_in.N());
  const int n = res.n;
  const int L = data_in.L();

  // Step 1: unstructured high-order fit, rank test, node ordering.
  const ArxFit fit1 = fit_arx_step1(data_in, n);
  res.lambda_hat = residual_covariance(fit1.innov);
  res.rank = estimate_rank(res.lambda_hat);
  res.diagnostics["step1"] = detail::diag_to_json(fit1.diag);
  {
    std::vector<double> sv(res.rank.singular_values.data(), res.rank.singular_values.data() + L);
    res.diagnostics["step1"]["singular_values"] = sv;
    res.diagnostics["step1"]["p_hat"] = res.rank.p_hat;
    res.diagnostics["step1"]["permutation"] = res.rank.permutation;
  }
  if (opt.expected_p > 0 && res.rank.p_hat != opt.expected_p)
    throw NumericalError("run_algorithm1: estimated noise rank " + std::to_string(res.rank.p_hat) +
                         " differs from expected " + std::to_string(opt.expected_p));
  const int p = res.rank.p_hat;

  Dataset data = data_in;
  NetworkModel known = known_in;
  if (!detail::is_identity(res.rank.permutation)) {
    data = permute_nodes(data_in, res.rank.permutation);
    known = permute_nodes(known_in, res.rank.permutation);
  }

  // Step 2.1: refit with the known excitation block pinned.
  const ArxFit fit21 = fit_arx_step21(data, n, p, known);
  res.diagnostics["step2.1"] = detail::diag_to_json(fit21.diag);

  Eigen::MatrixXd eps_a;
  if (opt.use_true_noise) {
    if (!data.e_true) throw StructuralError("run_algorithm1: true-noise mode needs stored noise");
    if (!detail::is_identity(res.rank.permutation))
      throw StructuralError("run_algorithm1: true-noise mode requires identity node ordering");
    if (data.e_true->cols() != p) throw StructuralError("run_algorithm1: stored noise has wrong rank");
    eps_a = *data.e_true;
  } else {
    eps_a = fit21.innov.eps.leftCols(p);
  }

  const PredictorTopology known_topo = topology_from_model(known);

  // Step 2.2: disturbance topology.
  if (opt.topology_method == "true") {
    if (known.p != p) throw StructuralError("run_algorithm1: known topology has different rank");
    res.topo = true_topology(known);
  } else {
    PredictorContext ctx(data, known, eps_a, n);
    nlohmann::json tdiag;
    res.topo = estimate_topology(ctx, known_topo, opt.topology_method, opt, &tdiag);
    res.diagnostics["step2.2"] = tdiag;
    res.diagnostics["step2.2"]["method"] = opt.topology_method;
  }

  // Step 3.1: structured refit (single pass when the true noise is supplied,
  // since the innovation update would only replace it with a reconstruction).
  PredictorTopology topo31 = known_topo;
  topo31.e_in = res.topo.v_sets;
  const RefinedFit refined = refine_step31(data, known, eps_a, topo31, n, opt.use_true_noise);
  res.diagnostics["step3.1"] = detail::diag_to_json(refined.fit.diag);

  const Eigen::MatrixXd lambda_check = residual_covariance(refined.fit.innov);
  res.lambda_a = lambda_check.topLeftCorner(p, p);

  // Steps 3.2 and 3.3: parametric reduction, then weighted re-estimation.
  res.bj.orders = opt.orders;
  res.bj.topo = topo31;
  res.bj.p = p;
  res.bj.gamma_hat = (p < L) ? gamma_estimate(refined.fit.innov) : Eigen::MatrixXd::Zero(0, p);
  nlohmann::json iter_log = nlohmann::json::array();
  for (int j = 0; j < L; ++j) {
    const NullspaceSystem sys = build_nullspace(refined.fit.model, j, opt.orders, res.bj.gamma_hat, p);
    Eigen::VectorXd theta0(0);
    IterateResult it;
    if (sys.theta_size() > 0) {
      const GramSystem sub = refined.ctx->full_gram().subset(refined.fit.columns[static_cast<std::size_t>(j)]);
      bool ridged = false;
      const Eigen::MatrixXd p_eta =
          nonparametric_covariance(sub.gram, refined.fit.sigma2[static_cast<std::size_t>(j)], &ridged);
      theta0 = initial_theta(sys, opt.weighted_initial ? &p_eta : nullptr);
      it = iterate_theta(sys, p_eta, theta0, opt.iterate_tol, opt.max_iter);
    } else {
      it.converged = true;
    }
    res.bj.theta.push_back(it.theta.size() ? it.theta : theta0);
    res.bj.theta_initial.push_back(theta0);
    res.bj.iterations.push_back(it.iterations);
    res.bj.converged.push_back(it.converged);
    nlohmann::json entry;
    entry["node"] = j + 1;
    entry["iterations"] = it.iterations;
    entry["converged"] = it.converged;
    entry["cond_stop"] = it.cond_stop;
    entry["step_norms"] = it.step_norms;
    iter_log.push_back(entry);
  }
  res.diagnostics["step3.3"] = iter_log;
  return res;
}

// ---------------------------------------------------------------------------
// Monte-Carlo benchmark harness.

struct RunConfig {
  std::string network_path;
  std::vector<long> n_list{300, 1078, 3873, 13916, 50000};
  std::vector<int> order_schedule;  // parallel to n_list; empty = defaults
  int runs = 100;
  std::uint64_t seed = 1;
  double r_variance = 5.0;
  int burn_in = kDefaultBurnIn;
  std::string stage = "full";  // rank | topology | full
  std::vector<std::string> methods{"glasso"};  // topology methods to score
  BjOrders orders{};
  bool use_true_noise = false;
  bool weighted_initial = true;
  bool glasso_penalize_g = true;
  int threads = 0;  // 0 = hardware concurrency
};

struct RunRecord {
  long N = 0;
  int run = 0;
  bool failed = false;
  std::string error;
  int p_hat = 0;
  Eigen::VectorXd singular_values;
  std::map<std::string, RocPoint> roc;
  double mse = 0.0;
  double mse_initial = 0.0;
  std::vector<int> iteration_counts;
};

struct BenchAggregate {
  long N = 0;
  int runs_ok = 0;
  int runs_failed = 0;
  double frac_rank_correct = 0.0;
  Eigen::VectorXd mean_singular_values;
  std::map<std::string, double> mean_dis;
  std::map<std::string, double> mean_tpr;
  std::map<std::string, double> mean_fpr;
  std::map<std::string, double> frac_perfect;  // dis == 0
  double mean_mse = 0.0;
  double mean_mse_initial = 0.0;
  double mean_improvement = 0.0;
  double median_iterations = 0.0;
};

struct BenchResult {
  RunConfig config;
  std::vector<RunRecord> records;  // ordered by (N index, run)
  std::vector<BenchAggregate> aggregates;
};

namespace detail {

inline std::uint64_t run_seed(std::uint64_t base, std::size_t n_index, int run, int stream) {
  std::uint64_t x = splitmix64(base ^ (0x51ed2701ull + 0x1000193ull * static_cast<std::uint64_t>(n_index)));
  x = splitmix64(x + static_cast<std::uint64_t>(run) * 2654435761ull);
  return splitmix64(x + static_cast<std::uint64_t>(stream));
}

inline RunRecord bench_single_run(const NetworkModel& model, const RunConfig& cfg, std::size_t n_index, int run) {
  RunRecord rec;
  rec.N = cfg.n_list[n_index];
  rec.run = run;
  const int n = cfg.order_schedule.empty() ? default_order_for(rec.N)
                                           : cfg.order_schedule[n_index];
  try {
    const Eigen::MatrixXd r = white_excitation(model.K, rec.N + cfg.burn_in, cfg.r_variance,
                                               run_seed(cfg.seed, n_index, run, 1));
    const Dataset data = simulate(model, r, run_seed(cfg.seed, n_index, run, 2), cfg.burn_in);

    const ArxFit fit1 = fit_arx_step1(data, n);
    const Eigen::MatrixXd lambda_hat = residual_covariance(fit1.innov);
    const RankResult rank = estimate_rank(lambda_hat);
    rec.p_hat = rank.p_hat;
    rec.singular_values = rank.singular_values;
    if (cfg.stage == "rank") return rec;
    if (rank.p_hat != model.p) throw NumericalError("estimated rank differs from the generating system");
    if (!is_identity(rank.permutation)) throw NumericalError("reordering moved pre-ordered nodes");

    const ArxFit fit21 = fit_arx_step21(data, n, model.p, model);
    Eigen::MatrixXd eps_a =
        cfg.use_true_noise ? *data.e_true : Eigen::MatrixXd(fit21.innov.eps.leftCols(model.p));
    const PredictorTopology known_topo = topology_from_model(model);
    const TopologyEstimate truth = true_topology(model);

    if (!cfg.methods.empty() && !(cfg.methods.size() == 1 && cfg.methods[0] == "true")) {
      PredictorContext ctx(data, model, eps_a, n);
      IdentifyOptions opt;
      opt.glasso_penalize_g = cfg.glasso_penalize_g;
      for (const auto& method : cfg.methods) {
        if (method == "true") continue;
        const TopologyEstimate est = estimate_topology(ctx, known_topo, method, opt);
        rec.roc[method] = roc_eval(est, truth);
      }
    }
    if (cfg.stage == "topology") return rec;

    // Parametric stage, run on the correct disturbance topology.
    const RefinedFit refined = refine_step31(data, model, eps_a, known_topo, n, cfg.use_true_noise);
    const Eigen::MatrixXd gamma_hat =
        (model.p < model.L) ? gamma_estimate(refined.fit.innov) : Eigen::MatrixXd::Zero(0, model.p);
    const BjEstimate truth_theta = true_parameters(model, cfg.orders);
    for (int j = 0; j < model.L; ++j) {
      const NullspaceSystem sys = build_nullspace(refined.fit.model, j, cfg.orders, gamma_hat, model.p);
      if (sys.theta_size() == 0) {
        rec.iteration_counts.push_back(0);
        continue;
      }
      const GramSystem sub = refined.ctx->full_gram().subset(refined.fit.columns[static_cast<std::size_t>(j)]);
      const Eigen::MatrixXd p_eta =
          nonparametric_covariance(sub.gram, refined.fit.sigma2[static_cast<std::size_t>(j)]);
      const Eigen::VectorXd theta0 = initial_theta(sys, cfg.weighted_initial ? &p_eta : nullptr);
      const IterateResult it = iterate_theta(sys, p_eta, theta0);
      rec.mse += (it.theta - truth_theta.theta[static_cast<std::size_t>(j)]).squaredNorm();
      rec.mse_initial += (theta0 - truth_theta.theta[static_cast<std::size_t>(j)]).squaredNorm();
      rec.iteration_counts.push_back(it.iterations);
    }
  } catch (const std::exception& err) {
    rec.failed = true;
    rec.error = err.what();
  }
  return rec;
}

}  // namespace detail

inline BenchResult run_benchmark(const NetworkModel& model, const RunConfig& cfg) {
  BenchResult result;
  result.config = cfg;
  const std::size_t total = cfg.n_list.size() * static_cast<std::size_t>(cfg.runs);
  result.records.resize(total);

  int n_threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total) return;
      const std::size_t n_index = i / static_cast<std::size_t>(cfg.runs);
      const int run = static_cast<int>(i % static_cast<std::size_t>(cfg.runs));
      result.records[i] = detail::bench_single_run(model, cfg, n_index, run);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  // Deterministic reduction in (N, run) order.
  for (std::size_t n_index = 0; n_index < cfg.n_list.size(); ++n_index) {
    BenchAggregate agg;
    agg.N = cfg.n_list[n_index];
    agg.mean_singular_values = Eigen::VectorXd::Zero(model.L);
    std::map<std::string, double> dis_sum, tpr_sum, fpr_sum, perfect;
    std::vector<int> all_iters;
    int rank_correct = 0, sval_count = 0;
    for (int run = 0; run < cfg.runs; ++run) {
      const RunRecord& rec = result.records[n_index * static_cast<std::size_t>(cfg.runs) + static_cast<std::size_t>(run)];
      if (rec.failed) {
        ++agg.runs_failed;
        continue;
      }
      ++agg.runs_ok;
      if (rec.p_hat == model.p) ++rank_correct;
      if (rec.singular_values.size() == model.L) {
        agg.mean_singular_values += rec.singular_values;
        ++sval_count;
      }
      for (const auto& [method, roc] : rec.roc) {
        dis_sum[method] += roc.dis;
        tpr_sum[method] += roc.tpr;
        fpr_sum[method] += roc.fpr;
        if (roc.dis == 0.0) perfect[method] += 1.0;
      }
      agg.mean_mse += rec.mse;
      agg.mean_mse_initial += rec.mse_initial;
      for (int k : rec.iteration_counts)
        if (k > 0) all_iters.push_back(k);
    }
    if (sval_count > 0) agg.mean_singular_values /= static_cast<double>(sval_count);
    if (agg.runs_ok > 0) {
      const double ok = static_cast<double>(agg.runs_ok);
      agg.frac_rank_correct = rank_correct / ok;
      for (auto& [m, v] : dis_sum) agg.mean_dis[m] = v / ok;
      for (auto& [m, v] : tpr_sum) agg.mean_tpr[m] = v / ok;
      for (auto& [m, v] : fpr_sum) agg.mean_fpr[m] = v / ok;
      for (auto& [m, v] : perfect) agg.frac_perfect[m] = v / ok;
      agg.mean_mse /= ok;
      agg.mean_mse_initial /= ok;
      agg.mean_improvement = agg.mean_mse_initial - agg.mean_mse;
    }
    if (!all_iters.empty()) {
      std::sort(all_iters.begin(), all_iters.end());
      agg.median_iterations = all_iters[all_iters.size() / 2];
    }
    result.aggregates.push_back(std::move(agg));
  }
  return result;
}

inline void write_benchmark_csv(const BenchResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  const auto& methods = result.config.methods;
  out << kFormatLine << "\n";
  out << "kind,N,run,failed,p_hat,mse,mse_initial,improvement,k_median";
  for (const auto& m : methods) out << ",dis_" << m;
  long L = result.records.empty() ? 0 : result.records.front().singular_values.size();
  for (long i = 0; i < L; ++i) out << ",s" << i + 1;
  out << ",error\n";
  for (const auto& rec : result.records) {
    std::vector<int> iters = rec.iteration_counts;
    std::sort(iters.begin(), iters.end());
    const double k_med = iters.empty() ? 0.0 : iters[iters.size() / 2];
    out << "record," << rec.N << "," << rec.run << "," << (rec.failed ? 1 : 0) << "," << rec.p_hat << ","
        << detail::format_double(rec.mse) << "," << detail::format_double(rec.mse_initial) << ","
        << detail::format_double(rec.mse_initial - rec.mse) << "," << k_med;
    for (const auto& m : methods) {
      auto it = rec.roc.find(m);
      out << "," << (it == rec.roc.end() ? std::string() : detail::format_double(it->second.dis));
    }
    for (long i = 0; i < L; ++i)
      out << "," << (rec.singular_values.size() == L ? detail::format_double(rec.singular_values(i)) : std::string());
    out << "," << rec.error << "\n";
  }
  for (const auto& agg : result.aggregates) {
    out << "aggregate," << agg.N << ",," << agg.runs_failed << "," << detail::format_double(agg.frac_rank_correct)
        << "," << detail::format_double(agg.mean_mse) << "," << detail::format_double(agg.mean_mse_initial) << ","
        << detail::format_double(agg.mean_improvement) << "," << detail::format_double(agg.median_iterations);
    for (const auto& m : methods) {
      auto it = agg.mean_dis.find(m);
      out << "," << (it == agg.mean_dis.end() ? std::string() : detail::format_double(it->second));
    }
    for (long i = 0; i < agg.mean_singular_values.size(); ++i)
      out << "," << detail::format_double(agg.mean_singular_values(i));
    out << ",\n";
  }
}

inline void write_roc_csv(const BenchResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << kFormatLine << "\n";
  out << "N,method,TPR,FPR,dis\n";
  for (const auto& agg : result.aggregates)
    for (const auto& [method, dis] : agg.mean_dis)
      out << agg.N << "," << method << "," << detail::format_double(agg.mean_tpr.at(method)) << ","
          << detail::format_double(agg.mean_fpr.at(method)) << "," << detail::format_double(dis) << "\n";
}

// ---------------------------------------------------------------------------
// Config file: "key = value" lines after the version line and kind "config".

inline RunConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  int line_no = 0;
  detail::expect_format_line(in, path, line_no);
  RunConfig cfg;
  bool kind_seen = false;
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (!kind_seen) {
      if (line != "config") throw ParseError(path, line_no, "expected document kind 'config'");
      kind_seen = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(path, line_no, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    const auto toks = detail::split_ws(val);
    if (key == "network") {
      std::filesystem::path netpath(val);
      if (netpath.is_relative()) netpath = std::filesystem::path(path).parent_path() / netpath;
      cfg.network_path = netpath.string();
    } else if (key == "N") {
      cfg.n_list.clear();
      for (const auto& t : toks) cfg.n_list.push_back(detail::parse_int(t, path, line_no));
    } else if (key == "order") {
      cfg.order_schedule.clear();
      for (const auto& t : toks) cfg.order_schedule.push_back(detail::parse_int(t, path, line_no));
    } else if (key == "runs") {
      cfg.runs = detail::parse_int(val, path, line_no);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(detail::parse_int(val, path, line_no));
    } else if (key == "r_variance") {
      cfg.r_variance = detail::parse_double(val, path, line_no);
    } else if (key == "burn_in") {
      cfg.burn_in = detail::parse_int(val, path, line_no);
    } else if (key == "stage") {
      cfg.stage = val;
    } else if (key == "topology") {
      cfg.methods.clear();
      for (const auto& t : toks)
        if (t == "all") {
          cfg.methods = {"aic", "bic", "cv", "glasso"};
          break;
        } else {
          cfg.methods.push_back(t);
        }
    } else if (key == "bj_orders") {
      if (toks.size() != 4) throw ParseError(path, line_no, "bj_orders needs m_l m_f m_c m_d");
      cfg.orders = {detail::parse_int(toks[0], path, line_no), detail::parse_int(toks[1], path, line_no),
                    detail::parse_int(toks[2], path, line_no), detail::parse_int(toks[3], path, line_no)};
    } else if (key == "use_true_noise") {
      cfg.use_true_noise = (val == "true" || val == "1");
    } else if (key == "weighted_initial") {
      cfg.weighted_initial = (val == "true" || val == "1");
    } else if (key == "glasso_include_g") {
      cfg.glasso_penalize_g = (val == "true" || val == "1");
    } else if (key == "threads") {
      cfg.threads = detail::parse_int(val, path, line_no);
    } else {
      throw ParseError(path, line_no, "unknown key '" + key + "'");
    }
  }
  if (cfg.network_path.empty()) throw ParseError(path, line_no, "missing 'network' entry");
  if (cfg.runs < 1) throw ParseError(path, line_no, "runs must be >= 1");
  for (std::size_t i = 1; i < cfg.n_list.size(); ++i)
    if (cfg.n_list[i] <= cfg.n_list[i - 1]) throw ParseError(path, 0, "N values must be increasing");
  if (!cfg.order_schedule.empty() && cfg.order_schedule.size() != cfg.n_list.size())
    throw ParseError(path, 0, "order schedule must match N list");
  return cfg;
}

}  // namespace netid
