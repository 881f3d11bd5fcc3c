#pragma once

// Disturbance-topology detection: noise-rank estimation from the innovation
// covariance, node reordering to expose a full-rank leading block, and
// per-node selection of the noise input sets by information criteria or
// cross-validation. ROC scoring compares estimated against true edge sets.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "netid/arx.hpp"

namespace netid {

struct RankPolicy {
  double floor_rel = 1e-8;          // values below floor_rel * sigma_1 count as zero
  double gap_min = 10.0;            // smallest ratio accepted as a spectral gap
  double degenerate_floor = 1e-12;  // sigma_1 below this means no usable signal
};

struct RankResult {
  Eigen::VectorXd singular_values;  // descending
  int p_hat = 0;
  std::vector<int> permutation;  // new position i holds original node permutation[i]
  double gap_ratio = std::numeric_limits<double>::infinity();
};

/// Greedy full-rank subset selection: repeatedly add the node maximizing the
/// smallest eigenvalue of the selected principal submatrix. Candidates within
/// a relative margin of the best count as tied and the earliest node wins;
/// sampled covariances of equal-variance processes would otherwise flip the
/// selection from run to run. The returned ordering puts the selected nodes
/// first (in original order), so the leading p_hat x p_hat block of the
/// permuted covariance has full numerical rank.
inline std::vector<int> reorder_nodes(const Eigen::MatrixXd& lambda_hat, int p_hat, double rank_floor = 0.0,
                                      double tie_margin = 0.25) {
  const int L = static_cast<int>(lambda_hat.rows());
  if (p_hat > L) throw StructuralError("reorder_nodes: p_hat exceeds dimension");
  std::vector<int> selected;
  std::vector<bool> used(static_cast<std::size_t>(L), false);
  double last_best = 0.0;
  for (int step = 0; step < p_hat; ++step) {
    std::vector<double> mineig(static_cast<std::size_t>(L), -std::numeric_limits<double>::infinity());
    double best_eig = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < L; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      std::vector<int> cand = selected;
      cand.push_back(c);
      Eigen::MatrixXd sub(cand.size(), cand.size());
      for (std::size_t i = 0; i < cand.size(); ++i)
        for (std::size_t j = 0; j < cand.size(); ++j) sub(static_cast<long>(i), static_cast<long>(j)) = lambda_hat(cand[i], cand[j]);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub, Eigen::EigenvaluesOnly);
      mineig[static_cast<std::size_t>(c)] = es.eigenvalues().minCoeff();
      best_eig = std::max(best_eig, mineig[static_cast<std::size_t>(c)]);
    }
    int best = -1;
    const double accept = best_eig > 0.0 ? (1.0 - tie_margin) * best_eig : best_eig;
    for (int c = 0; c < L && best < 0; ++c)
      if (!used[static_cast<std::size_t>(c)] && mineig[static_cast<std::size_t>(c)] >= accept) best = c;
    selected.push_back(best);
    used[static_cast<std::size_t>(best)] = true;
    last_best = mineig[static_cast<std::size_t>(best)];
  }
  if (p_hat > 0 && last_best <= rank_floor)
    throw NumericalError("reorder_nodes: no subset of size " + std::to_string(p_hat) + " has numerical rank " +
                         std::to_string(p_hat));
  std::sort(selected.begin(), selected.end());
  std::vector<int> perm = selected;
  for (int c = 0; c < L; ++c)
    if (!used[static_cast<std::size_t>(c)]) perm.push_back(c);
  return perm;
}

/// Rank test on the innovation covariance: singular values below the
/// relative floor count as zero, and the largest consecutive ratio marks the
/// spectral gap. Without a clear gap the matrix is taken as full rank.
inline RankResult estimate_rank(const Eigen::MatrixXd& lambda_hat, RankPolicy policy = {}) {
  const int L = static_cast<int>(lambda_hat.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(lambda_hat);
  RankResult res;
  res.singular_values = svd.singularValues();
  const double s1 = res.singular_values(0);
  if (!(s1 > policy.degenerate_floor))
    throw NumericalError("estimate_rank: covariance is numerically zero (degenerate data)");
  const double floor = policy.floor_rel * s1;
  int above = 0;
  for (int i = 0; i < L; ++i)
    if (res.singular_values(i) > floor) ++above;

  int best_i = L;
  double best_ratio = 0.0;
  for (int i = 0; i + 1 < L; ++i) {
    const double hi = res.singular_values(i);
    const double lo = res.singular_values(i + 1);
    const double ratio = (lo > 0.0) ? hi / lo : std::numeric_limits<double>::infinity();
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best_i = i + 1;
    }
  }
  res.p_hat = (best_ratio >= policy.gap_min) ? best_i : L;
  res.p_hat = std::min(res.p_hat, above);
  if (res.p_hat <= 0) throw NumericalError("estimate_rank: estimated rank is zero (degenerate data)");
  res.gap_ratio = (res.p_hat < L && res.singular_values(res.p_hat) > 0.0)
                      ? res.singular_values(res.p_hat - 1) / res.singular_values(res.p_hat)
                      : std::numeric_limits<double>::infinity();
  res.permutation = reorder_nodes(lambda_hat, res.p_hat, floor);
  return res;
}

// ---------------------------------------------------------------------------
// Structure selection.

enum class SelectionCriterion { kAic, kBic, kCv };

inline const char* to_string(SelectionCriterion c) {
  switch (c) {
    case SelectionCriterion::kAic: return "aic";
    case SelectionCriterion::kBic: return "bic";
    case SelectionCriterion::kCv: return "cv";
  }
  return "?";
}

struct TopologyEstimate {
  int L = 0;
  int p = 0;
  std::vector<std::vector<int>> v_sets;  // per node, 0-based noise indices
  std::string method;
  // Audit trail: per node, each candidate set with its score.
  std::vector<std::vector<std::pair<std::vector<int>, double>>> score_table;
};

inline TopologyEstimate true_topology(const NetworkModel& model) {
  TopologyEstimate t;
  t.L = model.L;
  t.p = model.p;
  t.method = "true";
  t.v_sets = topology_from_model(model).e_in;
  t.score_table.resize(static_cast<std::size_t>(model.L));
  return t;
}

namespace detail {

inline std::vector<std::vector<int>> all_subsets(int p) {
  std::vector<std::vector<int>> out;
  for (unsigned mask = 0; mask < (1u << p); ++mask) {
    std::vector<int> s;
    for (int i = 0; i < p; ++i)
      if (mask & (1u << i)) s.push_back(i);
    out.push_back(std::move(s));
  }
  // Candidate order: fewest edges first, then lexicographic, so the argmin
  // tie-break is "keep the earlier candidate".
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

}  // namespace detail

/// Scores one candidate noise set for one node on a prepared context.
/// Returns the criterion value (lower is better).
inline double score_candidate(const PredictorContext& ctx, int node, const std::vector<int>& w_set,
                              const std::vector<int>& v_set, SelectionCriterion criterion, bool* flagged = nullptr) {
  const std::vector<int> cols = ctx.columns_for(w_set, v_set);
  const double n_params = static_cast<double>(cols.size());
  if (criterion == SelectionCriterion::kCv) {
    const GramSystem train = cols.empty() ? GramSystem{} : ctx.train_gram().subset(cols);
    const GramSystem val_full = cols.empty() ? GramSystem{} : ctx.full_gram().subset(cols);
    Eigen::VectorXd c(0);
    long val_rows = ctx.data().N() - ctx.split();
    double ssr_val = 0.0;
    if (!cols.empty()) {
      const LsSolution sol = solve_normal(train.gram, train.cross.col(node));
      if (flagged && sol.rank_deficient) *flagged = true;
      c = sol.coeffs.col(0);
      const GramSystem val = val_full.minus(train);
      val_rows = val.rows;
      ssr_val = ssr_from_gram(val, node, c);
    } else {
      // Parameter-free candidate: validation error is the raw target power.
      const Target tgt = ctx.node_target(node);
      for (long t = ctx.split(); t < ctx.data().N(); ++t) ssr_val += tgt.value(t) * tgt.value(t);
    }
    return std::sqrt(ssr_val / static_cast<double>(std::max<long>(val_rows, 1)));
  }

  double ssr = 0.0;
  const long rows = ctx.data().N() - ctx.order();
  if (!cols.empty()) {
    const GramSystem sub = ctx.full_gram().subset(cols);
    const LsSolution sol = solve_normal(sub.gram, sub.cross.col(node));
    if (flagged && sol.rank_deficient) *flagged = true;
    ssr = ssr_from_gram(sub, node, sol.coeffs.col(0));
  } else {
    ssr = ctx.full_gram().yy(node);
  }
  const double v = std::max(ssr / static_cast<double>(rows), 1e-300);
  const double n_eff = static_cast<double>(rows);
  if (criterion == SelectionCriterion::kAic) return 0.5 * std::log(v) + n_params / n_eff;
  return n_eff * std::log(v) + n_eff * (std::log(2.0 * std::numbers::pi) + 1.0) + n_params * std::log(n_eff);
}

/// Exhaustive search over candidate noise sets for one node. Ties go to the
/// candidate with fewer edges, then lexicographically first.
inline std::pair<std::vector<int>, std::vector<std::pair<std::vector<int>, double>>> select_structure(
    const PredictorContext& ctx, int node, const std::vector<int>& w_set, SelectionCriterion criterion) {
  std::vector<std::pair<std::vector<int>, double>> table;
  std::vector<int> best_set;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& cand : detail::all_subsets(ctx.p())) {
    bool flagged = false;
    const double score = score_candidate(ctx, node, w_set, cand, criterion, &flagged);
    table.emplace_back(cand, score);
    if (score < best_score) {
      best_score = score;
      best_set = cand;
    }
  }
  return {best_set, table};
}

// ---------------------------------------------------------------------------
// ROC scoring of estimated edge sets.

struct RocPoint {
  int tp = 0, fp = 0, pos = 0, neg = 0;
  double tpr = 0.0, fpr = 0.0, dis = 0.0;
  bool degenerate = false;  // pos or neg was zero; the ratio is reported as 0
};

inline RocPoint roc_eval(const TopologyEstimate& estimated, const TopologyEstimate& truth) {
  if (estimated.L != truth.L || estimated.p != truth.p) throw StructuralError("roc_eval: dimension mismatch");
  RocPoint roc;
  for (int j = 0; j < truth.L; ++j) {
    const auto& tv = truth.v_sets[static_cast<std::size_t>(j)];
    const auto& ev = estimated.v_sets[static_cast<std::size_t>(j)];
    for (int s = 0; s < truth.p; ++s) {
      const bool in_truth = std::find(tv.begin(), tv.end(), s) != tv.end();
      const bool in_est = std::find(ev.begin(), ev.end(), s) != ev.end();
      if (in_truth) {
        ++roc.pos;
        if (in_est) ++roc.tp;
      } else {
        ++roc.neg;
        if (in_est) ++roc.fp;
      }
    }
  }
  if (roc.pos > 0)
    roc.tpr = static_cast<double>(roc.tp) / roc.pos;
  else
    roc.degenerate = true;
  if (roc.neg > 0)
    roc.fpr = static_cast<double>(roc.fp) / roc.neg;
  else
    roc.degenerate = true;
  roc.dis = std::sqrt(roc.fpr * roc.fpr + (1.0 - roc.tpr) * (1.0 - roc.tpr));
  return roc;
}

}  // namespace netid
