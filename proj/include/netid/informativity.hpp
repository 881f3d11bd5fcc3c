#pragma once

// Generic data-informativity checks: vertex-disjoint path counting on the
// signal graph via unit-capacity max-flow with node splitting, plus the
// experiment-design search that proposes excitation locations.

#include <algorithm>
#include <queue>
#include <string>
#include <vector>

#include "netid/network.hpp"

namespace netid {

/// Directed graph over signal vertices: the L node signals first, then the
/// p noise sources, then the K excitation sources (which never have
/// incoming edges).
struct SignalGraph {
  int L = 0, p = 0, K = 0;
  std::vector<std::vector<int>> adj;

  int n_vertices() const { return L + p + K; }
  int w_vertex(int j) const { return j; }
  int e_vertex(int s) const { return L + s; }
  int r_vertex(int k) const { return L + p + k; }

  std::string vertex_name(int v) const {
    if (v < L) return "w" + std::to_string(v + 1);
    if (v < L + p) return "e" + std::to_string(v - L + 1);
    return "r" + std::to_string(v - L - p + 1);
  }

  static SignalGraph from_model(const NetworkModel& model) {
    SignalGraph g;
    g.L = model.L;
    g.p = model.p;
    g.K = model.K;
    g.adj.resize(static_cast<std::size_t>(g.n_vertices()));
    for (int j = 0; j < model.L; ++j) {
      for (int l = 0; l < model.L; ++l)
        if (model.G.present(j, l)) g.adj[static_cast<std::size_t>(g.w_vertex(l))].push_back(g.w_vertex(j));
      for (int s = 0; s < model.p; ++s)
        if (model.H.present(j, s)) g.adj[static_cast<std::size_t>(g.e_vertex(s))].push_back(g.w_vertex(j));
      for (int k = 0; k < model.K; ++k)
        if (model.R.present(j, k)) g.adj[static_cast<std::size_t>(g.r_vertex(k))].push_back(g.w_vertex(j));
    }
    return g;
  }
};

struct PathCheckReport {
  int required = 0;
  int achieved = 0;
  bool satisfied = false;
  std::vector<std::vector<int>> witness;  // vertex id lists, source to sink

  std::vector<std::string> witness_names(const SignalGraph& g) const {
    std::vector<std::string> out;
    for (const auto& path : witness) {
      std::string s;
      for (std::size_t i = 0; i < path.size(); ++i) {
        if (i) s += " -> ";
        s += g.vertex_name(path[i]);
      }
      out.push_back(std::move(s));
    }
    return out;
  }
};

namespace detail {

// Unit-capacity max-flow with per-vertex capacity one (node splitting):
// vertex v becomes v_in = 2v and v_out = 2v+1 joined by a capacity-1 edge.
class DisjointPathFlow {
 public:
  DisjointPathFlow(const SignalGraph& g, const std::vector<int>& sources, const std::vector<int>& sinks) {
    const int nv = g.n_vertices();
    n_ = 2 * nv + 2;
    source_ = 2 * nv;
    sink_ = 2 * nv + 1;
    head_.assign(static_cast<std::size_t>(n_), std::vector<int>());
    for (int v = 0; v < nv; ++v) add_edge(2 * v, 2 * v + 1);
    for (int v = 0; v < nv; ++v)
      for (int to : g.adj[static_cast<std::size_t>(v)]) add_edge(2 * v + 1, 2 * to);
    for (int s : sources) add_edge(source_, 2 * s);
    for (int t : sinks) add_edge(2 * t + 1, sink_);
  }

  int run() {
    int flow = 0;
    while (augment()) ++flow;
    return flow;
  }

  /// Decomposes the final flow into vertex lists in original vertex ids.
  std::vector<std::vector<int>> decompose() const {
    std::vector<std::vector<int>> paths;
    for (int id : head_[static_cast<std::size_t>(source_)]) {
      if (edges_[static_cast<std::size_t>(id)].flow != 1) continue;
      std::vector<int> path;
      int cur = edges_[static_cast<std::size_t>(id)].to;  // some v_in
      while (cur != sink_) {
        if (cur % 2 == 0) path.push_back(cur / 2);
        int next = -1;
        for (int eid : head_[static_cast<std::size_t>(cur)]) {
          const Edge& e = edges_[static_cast<std::size_t>(eid)];
          if (eid % 2 == 0 && e.flow == 1) {
            next = e.to;
            break;
          }
        }
        cur = next;
      }
      paths.push_back(std::move(path));
    }
    return paths;
  }

 private:
  struct Edge {
    int to;
    int flow;  // forward edges carry capacity 1; odd ids are reverses
  };

  void add_edge(int from, int to) {
    head_[static_cast<std::size_t>(from)].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({to, 0});
    head_[static_cast<std::size_t>(to)].push_back(static_cast<int>(edges_.size()));
    edges_.push_back({from, 0});
  }

  int residual(int id) const {
    const int cap = (id % 2 == 0) ? 1 : 0;
    return cap - edges_[static_cast<std::size_t>(id)].flow;
  }

  bool augment() {
    std::vector<int> parent_edge(static_cast<std::size_t>(n_), -1);
    std::vector<bool> seen(static_cast<std::size_t>(n_), false);
    std::queue<int> queue;
    queue.push(source_);
    seen[static_cast<std::size_t>(source_)] = true;
    while (!queue.empty() && !seen[static_cast<std::size_t>(sink_)]) {
      const int v = queue.front();
      queue.pop();
      for (int id : head_[static_cast<std::size_t>(v)]) {
        const int to = edges_[static_cast<std::size_t>(id)].to;
        if (seen[static_cast<std::size_t>(to)] || residual(id) <= 0) continue;
        seen[static_cast<std::size_t>(to)] = true;
        parent_edge[static_cast<std::size_t>(to)] = id;
        queue.push(to);
      }
    }
    if (!seen[static_cast<std::size_t>(sink_)]) return false;
    for (int v = sink_; v != source_;) {
      const int id = parent_edge[static_cast<std::size_t>(v)];
      edges_[static_cast<std::size_t>(id)].flow += 1;
      edges_[static_cast<std::size_t>(id ^ 1)].flow -= 1;
      v = edges_[static_cast<std::size_t>(id ^ 1)].to;
    }
    return true;
  }

  int n_, source_, sink_;
  std::vector<std::vector<int>> head_;
  std::vector<Edge> edges_;
};

}  // namespace detail

/// Maximum number of directed paths from sources to sinks sharing no vertex,
/// endpoints included, with one witness set of that size.
inline std::pair<int, std::vector<std::vector<int>>> max_disjoint_paths(const SignalGraph& g,
                                                                        const std::vector<int>& sources,
                                                                        const std::vector<int>& sinks) {
  if (sources.empty() || sinks.empty()) return {0, {}};
  detail::DisjointPathFlow flow(g, sources, sinks);
  const int count = flow.run();
  return {count, flow.decompose()};
}

namespace detail {

inline SignalGraph with_extra_excitation(const NetworkModel& model, const std::vector<int>& extra_nodes) {
  SignalGraph g = SignalGraph::from_model(model);
  for (int node : extra_nodes) {
    g.adj.push_back({g.w_vertex(node)});
    ++g.K;
    // the adjacency slot just appended is r_vertex(K-1)
  }
  return g;
}

}  // namespace detail

/// Full-network informativity: L vertex-disjoint paths from the noise
/// sources plus the excitations entering the last L-p nodes to all nodes.
/// extra_nodes adds hypothetical unit excitations for experiment design.
inline PathCheckReport check_prop3(const NetworkModel& model, const std::vector<int>& extra_nodes = {}) {
  const SignalGraph g = detail::with_extra_excitation(model, extra_nodes);
  std::vector<int> sources;
  for (int s = 0; s < model.p; ++s) sources.push_back(g.e_vertex(s));
  for (int k = 0; k < model.K; ++k) {
    bool drives_b = false;
    for (int j = model.p; j < model.L; ++j) drives_b = drives_b || model.R.present(j, k);
    if (drives_b) sources.push_back(g.r_vertex(k));
  }
  for (std::size_t i = 0; i < extra_nodes.size(); ++i)
    if (extra_nodes[i] >= model.p) sources.push_back(g.r_vertex(model.K + static_cast<int>(i)));
  std::vector<int> sinks;
  for (int j = 0; j < model.L; ++j) sinks.push_back(g.w_vertex(j));

  PathCheckReport report;
  report.required = model.L;
  auto [count, witness] = max_disjoint_paths(g, sources, sinks);
  report.achieved = count;
  report.witness = std::move(witness);
  report.satisfied = report.achieved >= report.required;
  return report;
}

/// Node-wise informativity: |w_in(j)| vertex-disjoint paths from all
/// excitations plus the noise sources outside the node's own set to the
/// node's predictor inputs.
inline PathCheckReport check_prop4(const NetworkModel& model, int node, const std::vector<int>& extra_nodes = {}) {
  if (node < 0 || node >= model.L) throw StructuralError("check_prop4: node out of range");
  const SignalGraph g = detail::with_extra_excitation(model, extra_nodes);
  std::vector<bool> own(static_cast<std::size_t>(model.p), false);
  std::vector<int> sinks;
  for (int s = 0; s < model.p; ++s)
    if (model.H.present(node, s)) own[static_cast<std::size_t>(s)] = true;
  for (int l = 0; l < model.L; ++l)
    if (model.G.present(node, l)) sinks.push_back(g.w_vertex(l));

  std::vector<int> sources;
  for (int k = 0; k < g.K; ++k) sources.push_back(g.r_vertex(k));
  for (int s = 0; s < model.p; ++s)
    if (!own[static_cast<std::size_t>(s)]) sources.push_back(g.e_vertex(s));

  PathCheckReport report;
  report.required = static_cast<int>(sinks.size());
  auto [count, witness] = max_disjoint_paths(g, sources, sinks);
  report.achieved = count;
  report.witness = std::move(witness);
  report.satisfied = report.achieved >= report.required;
  return report;
}

inline bool all_checks_pass(const NetworkModel& model, const std::vector<int>& extra_nodes) {
  if (!check_prop3(model, extra_nodes).satisfied) return false;
  for (int j = 0; j < model.L; ++j)
    if (!check_prop4(model, j, extra_nodes).satisfied) return false;
  return true;
}

struct ExcitationSuggestion {
  bool feasible = false;
  std::vector<int> nodes;  // 0-based node indices needing a unit excitation
};

/// Searches for excitation locations making every check pass. The default is
/// a greedy heuristic adding one node at a time (largest gain in achieved
/// path counts, smallest index on ties); exhaustive mode scans subsets by
/// cardinality and is exact but exponential.
inline ExcitationSuggestion suggest_excitation(const NetworkModel& model, bool exhaustive = false) {
  ExcitationSuggestion out;
  if (all_checks_pass(model, {})) {
    out.feasible = true;
    return out;
  }
  const int L = model.L;
  if (exhaustive) {
    for (int size = 1; size <= L; ++size) {
      std::vector<int> pick(static_cast<std::size_t>(size));
      // lexicographic subsets of {0..L-1} of the given size
      std::vector<int> idx(static_cast<std::size_t>(size));
      for (int i = 0; i < size; ++i) idx[static_cast<std::size_t>(i)] = i;
      for (;;) {
        if (all_checks_pass(model, idx)) {
          out.feasible = true;
          out.nodes = idx;
          return out;
        }
        int i = size - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == L - size + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < size; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
    return out;
  }

  auto total_achieved = [&](const std::vector<int>& extra) {
    int acc = std::min(check_prop3(model, extra).achieved, model.L);
    for (int j = 0; j < L; ++j) {
      const PathCheckReport rep = check_prop4(model, j, extra);
      acc += std::min(rep.achieved, rep.required);
    }
    return acc;
  };

  std::vector<int> chosen;
  while (static_cast<int>(chosen.size()) < L) {
    if (all_checks_pass(model, chosen)) {
      out.feasible = true;
      out.nodes = chosen;
      return out;
    }
    int best = -1, best_gain = -1;
    for (int c = 0; c < L; ++c) {
      if (std::find(chosen.begin(), chosen.end(), c) != chosen.end()) continue;
      std::vector<int> trial = chosen;
      trial.push_back(c);
      const int gain = total_achieved(trial);
      if (gain > best_gain) {
        best_gain = gain;
        best = c;
      }
    }
    chosen.push_back(best);
    std::sort(chosen.begin(), chosen.end());
  }
  if (all_checks_pass(model, chosen)) {
    out.feasible = true;
    out.nodes = chosen;
  }
  return out;
}

}  // namespace netid
