#pragma once

// Command-line front end: simulate | identify | rank | informativity |
// benchmark, all file based. Exit codes: 0 ok, 1 input/validation error,
// 2 numerical failure.

#include <CLI11.hpp>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "netid/informativity.hpp"
#include "netid/pipeline.hpp"

namespace netid {

inline nlohmann::json rank_report(const RankResult& rank) {
  nlohmann::json j;
  j["p_hat"] = rank.p_hat;
  std::vector<double> sv(rank.singular_values.data(), rank.singular_values.data() + rank.singular_values.size());
  j["singular_values"] = sv;
  j["gap_ratio"] = std::isfinite(rank.gap_ratio) ? nlohmann::json(rank.gap_ratio) : nlohmann::json("inf");
  std::vector<int> perm;
  for (int v : rank.permutation) perm.push_back(v + 1);
  j["permutation"] = perm;
  return j;
}

inline nlohmann::json topology_report(const RankResult& rank, const TopologyEstimate& topo) {
  nlohmann::json j;
  j["p_hat"] = rank.p_hat;
  std::vector<int> perm;
  for (int v : rank.permutation) perm.push_back(v + 1);
  j["permutation"] = perm;
  nlohmann::json nodes = nlohmann::json::array();
  for (int node = 0; node < topo.L; ++node) {
    nlohmann::json entry;
    entry["node"] = node + 1;
    std::vector<int> v1;
    for (int s : topo.v_sets[static_cast<std::size_t>(node)]) v1.push_back(s + 1);
    entry["V"] = v1;
    entry["method"] = topo.method;
    nlohmann::json table = nlohmann::json::array();
    if (static_cast<std::size_t>(node) < topo.score_table.size()) {
      for (const auto& [cand, score] : topo.score_table[static_cast<std::size_t>(node)]) {
        std::vector<int> c1;
        for (int s : cand) c1.push_back(s + 1);
        table.push_back({{"V", c1}, {"score", score}});
      }
    }
    entry["score_table"] = table;
    nodes.push_back(entry);
  }
  j["per_node"] = nodes;
  return j;
}

inline nlohmann::json path_report_json(const PathCheckReport& rep, const SignalGraph& graph) {
  nlohmann::json j;
  j["required"] = rep.required;
  j["achieved"] = rep.achieved;
  j["satisfied"] = rep.satisfied;
  j["witness"] = rep.witness_names(graph);
  return j;
}

inline nlohmann::json informativity_report(const NetworkModel& model, bool exhaustive = false) {
  const SignalGraph graph = SignalGraph::from_model(model);
  nlohmann::json j;
  j["prop3"] = path_report_json(check_prop3(model), graph);
  nlohmann::json per_node = nlohmann::json::array();
  for (int node = 0; node < model.L; ++node) {
    nlohmann::json entry = path_report_json(check_prop4(model, node), graph);
    entry["node"] = node + 1;
    per_node.push_back(entry);
  }
  j["prop4"] = per_node;
  const ExcitationSuggestion suggestion = suggest_excitation(model, exhaustive);
  nlohmann::json s;
  s["feasible"] = suggestion.feasible;
  std::vector<int> nodes1;
  for (int v : suggestion.nodes) nodes1.push_back(v + 1);
  s["nodes"] = nodes1;
  j["suggested_excitation"] = s;
  return j;
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  out << text;
}

}  // namespace detail

inline int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"dynamic network identification with unknown disturbance topology"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate a network file to a dataset CSV");
  std::string sim_network, sim_out = "dataset.csv";
  long sim_n = 1000;
  std::uint64_t sim_seed = 1;
  int sim_burn_in = kDefaultBurnIn;
  double sim_rvar = 5.0;
  bool sim_export_noise = false;
  sim->add_option("--network", sim_network, "network spec file")->required();
  sim->add_option("--N", sim_n, "samples to keep")->required();
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--burn-in", sim_burn_in, "discarded warmup samples");
  sim->add_option("--r-variance", sim_rvar, "white excitation variance");
  sim->add_flag("--export-noise", sim_export_noise, "append the noise realization columns");
  sim->add_option("--out", sim_out, "output CSV path");
  sim->callback([&]() {
    const NetworkModel model = read_network_file(sim_network);
    const Eigen::MatrixXd r =
        white_excitation(model.K, sim_n + sim_burn_in, sim_rvar, splitmix64(sim_seed ^ 0xa5a5a5a5ull));
    const Dataset data = simulate(model, r, splitmix64(sim_seed ^ 0x5a5a5a5aull), sim_burn_in);
    write_dataset_csv(data, sim_out, sim_export_noise);
  });

  // identify
  auto* ident = app.add_subcommand("identify", "run the full identification pass on a dataset");
  std::string id_data, id_network, id_method = "glasso", id_prefix = "identify";
  int id_n = 0;
  std::vector<int> id_orders;
  bool id_true_noise = false;
  ident->add_option("--data", id_data, "dataset CSV")->required();
  ident->add_option("--network", id_network, "network spec carrying the known topology")->required();
  ident->add_option("--method", id_method, "topology method: aic|bic|cv|glasso|true");
  ident->add_option("--n", id_n, "high-order model order (0 = schedule default)");
  ident->add_option("--orders", id_orders, "module orders m_l m_f m_c m_d")->expected(4);
  ident->add_flag("--use-true-noise", id_true_noise, "consume stored noise instead of the reconstruction");
  ident->add_option("--out-prefix", id_prefix, "prefix for the emitted files");
  ident->callback([&]() {
    const NetworkModel known = read_network_file(id_network);
    const Dataset data = read_dataset_csv(id_data);
    IdentifyOptions opt;
    opt.topology_method = id_method;
    opt.n = id_n;
    opt.use_true_noise = id_true_noise;
    if (!id_orders.empty()) opt.orders = {id_orders[0], id_orders[1], id_orders[2], id_orders[3]};
    const Alg1Result res = run_algorithm1(data, known, opt);
    detail::write_text(id_prefix + ".topology.json", topology_report(res.rank, res.topo).dump(2) + "\n");
    detail::write_text(id_prefix + ".diagnostics.json", res.diagnostics.dump(2) + "\n");
    NetworkModel est = to_network(res.bj, known.R, res.lambda_a);
    write_network_file(est, id_prefix + ".model.net");
  });

  // rank
  auto* rank_cmd = app.add_subcommand("rank", "noise-rank estimate from a dataset");
  std::string rank_data, rank_out;
  int rank_n = 0;
  rank_cmd->add_option("--data", rank_data, "dataset CSV")->required();
  rank_cmd->add_option("--n", rank_n, "high-order model order (0 = schedule default)");
  rank_cmd->add_option("--out", rank_out, "output JSON path (default stdout)");
  rank_cmd->callback([&]() {
    const Dataset data = read_dataset_csv(rank_data);
    const int n = rank_n > 0 ? rank_n : default_order_for(data.N());
    const ArxFit fit = fit_arx_step1(data, n);
    const RankResult rank = estimate_rank(residual_covariance(fit.innov));
    const std::string text = rank_report(rank).dump(2) + "\n";
    if (rank_out.empty())
      std::cout << text;
    else
      detail::write_text(rank_out, text);
  });

  // informativity
  auto* info = app.add_subcommand("informativity", "path-based experiment design checks");
  std::string info_network, info_out;
  bool info_exhaustive = false;
  info->add_option("--network", info_network, "network spec file")->required();
  info->add_option("--out", info_out, "output JSON path (default stdout)");
  info->add_flag("--exhaustive", info_exhaustive, "exact subset search for the excitation suggestion");
  info->callback([&]() {
    const NetworkModel model = read_network_file(info_network);
    const std::string text = informativity_report(model, info_exhaustive).dump(2) + "\n";
    if (info_out.empty())
      std::cout << text;
    else
      detail::write_text(info_out, text);
  });

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "seeded Monte-Carlo study from a config file");
  std::string bench_config, bench_prefix = "benchmark";
  bench->add_option("--config", bench_config, "run config file")->required();
  bench->add_option("--out-prefix", bench_prefix, "prefix for the emitted files");
  bench->callback([&]() {
    const RunConfig cfg = read_config_file(bench_config);
    const NetworkModel model = read_network_file(cfg.network_path);
    const BenchResult result = run_benchmark(model, cfg);
    write_benchmark_csv(result, bench_prefix + ".csv");
    write_roc_csv(result, bench_prefix + ".roc.csv");
  });

  std::vector<std::string> argv_store = args;
  std::vector<char*> argv;
  argv.push_back(const_cast<char*>("netid"));
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  } catch (const ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const StructuralError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace netid
