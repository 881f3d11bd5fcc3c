#pragma once

// Group Lasso on the structured node predictor: proximal gradient with block
// soft-thresholding and backtracking line search, working on precomputed
// normal-equation data so iterations cost O(cols^2) regardless of N.

#include <Eigen/Dense>
#include <cmath>
#include <tuple>
#include <vector>

#include "netid/arx.hpp"
#include "netid/topology.hpp"

namespace netid {

struct GlassoOptions {
  double lambda = 0.0;
  double obj_rel_tol = 1e-8;
  int max_iterations = 10000;
  double active_tol = 1e-3;  // group counts as active above this l2 norm
  bool penalize_g = true;    // include module (G) groups in the penalty
};

struct GroupSpec {
  int offset;
  int size;
  bool penalized;
};

struct GlassoResult {
  Eigen::VectorXd eta;
  std::vector<int> active_groups;  // indices into the group list
  std::vector<int> active_e;       // noise indices whose group is active (node-level fits)
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
  double objective = 0.0;
};

class GlassoNonConvergence : public NumericalError {
 public:
  GlassoNonConvergence(GlassoResult last_iterate, const std::string& what)
      : NumericalError(what), last(std::move(last_iterate)) {}
  GlassoResult last;
};

namespace detail {

inline double power_iteration_max_eig(const Eigen::MatrixXd& m, int iters = 60) {
  if (m.rows() == 0) return 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows());
  v.normalize();
  double eig = 0.0;
  for (int i = 0; i < iters; ++i) {
    Eigen::VectorXd mv = m * v;
    const double norm = mv.norm();
    if (norm <= 0.0) return 0.0;
    eig = v.dot(mv);
    v = mv / norm;
  }
  return std::max(eig, 0.0);
}

inline void block_soft_threshold(Eigen::VectorXd& z, const std::vector<GroupSpec>& groups, double amount) {
  for (const auto& g : groups) {
    if (!g.penalized) continue;
    auto seg = z.segment(g.offset, g.size);
    const double norm = seg.norm();
    seg *= (norm > amount) ? (1.0 - amount / norm) : 0.0;
  }
}

inline double penalty_term(const Eigen::VectorXd& eta, const std::vector<GroupSpec>& groups, double lambda) {
  double acc = 0.0;
  for (const auto& g : groups)
    if (g.penalized) acc += eta.segment(g.offset, g.size).norm();
  return lambda * acc;
}

}  // namespace detail

/// Minimizes 0.5*|y - X eta|^2 + lambda * sum_g |eta_g|_2 given gram = X^T X,
/// cross = X^T y and yy = y^T y. Throws GlassoNonConvergence (carrying the
/// last iterate and its KKT residual) when the iteration cap is reached.
inline GlassoResult glasso_solve(const Eigen::MatrixXd& gram, const Eigen::VectorXd& cross, double yy,
                                 const std::vector<GroupSpec>& groups, const GlassoOptions& opt,
                                 const Eigen::VectorXd* warm_start = nullptr) {
  const long m = gram.rows();
  GlassoResult res;
  res.eta = (warm_start && warm_start->size() == m) ? *warm_start : Eigen::VectorXd::Zero(m);

  const double lipschitz = detail::power_iteration_max_eig(gram);
  double step = (lipschitz > 0.0) ? 1.0 / lipschitz : 1.0;

  auto quad = [&](const Eigen::VectorXd& x) {
    return 0.5 * x.dot(gram.selfadjointView<Eigen::Lower>() * x) - cross.dot(x) + 0.5 * yy;
  };
  double f_cur = quad(res.eta);
  double obj_prev = f_cur + detail::penalty_term(res.eta, groups, opt.lambda);

  for (res.iterations = 1; res.iterations <= opt.max_iterations; ++res.iterations) {
    const Eigen::VectorXd grad = gram.selfadjointView<Eigen::Lower>() * res.eta - cross;
    Eigen::VectorXd next;
    double f_next = 0.0;
    for (;;) {
      next = res.eta - step * grad;
      detail::block_soft_threshold(next, groups, step * opt.lambda);
      f_next = quad(next);
      const Eigen::VectorXd d = next - res.eta;
      const double bound = f_cur + grad.dot(d) + d.squaredNorm() / (2.0 * step);
      if (f_next <= bound + 1e-12 * std::abs(bound)) break;
      step *= 0.5;
      if (step < 1e-18) break;
    }
    res.eta = next;
    f_cur = f_next;
    const double obj = f_cur + detail::penalty_term(res.eta, groups, opt.lambda);
    const double decrease = obj_prev - obj;
    if (decrease < opt.obj_rel_tol * std::max(std::abs(obj_prev), 1e-300) && res.iterations > 1) {
      res.converged = true;
      obj_prev = obj;
      break;
    }
    obj_prev = obj;
  }
  res.objective = obj_prev;

  // KKT residual: for active penalized groups the negative gradient must be
  // lambda times the unit coefficient direction; inactive groups must have
  // gradient norm within lambda.
  const Eigen::VectorXd grad = gram.selfadjointView<Eigen::Lower>() * res.eta - cross;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const auto grad_seg = grad.segment(g.offset, g.size);
    const auto eta_seg = res.eta.segment(g.offset, g.size);
    double viol = 0.0;
    if (!g.penalized) {
      viol = grad_seg.norm();
    } else if (eta_seg.norm() > 0.0) {
      viol = (grad_seg + opt.lambda * eta_seg.normalized()).norm();
    } else {
      viol = std::max(0.0, grad_seg.norm() - opt.lambda);
    }
    res.kkt_residual = std::max(res.kkt_residual, viol);
    if (eta_seg.norm() > opt.active_tol) res.active_groups.push_back(static_cast<int>(gi));
  }
  if (!res.converged)
    throw GlassoNonConvergence(res, "glasso_solve: no convergence after " + std::to_string(opt.max_iterations) +
                                        " iterations (kkt residual " + std::to_string(res.kkt_residual) + ")");
  return res;
}

/// Node-level fit with the disturbance model fully parametrized over all p
/// noise inputs; groups are the n coefficients of each module polynomial.
inline GlassoResult glasso_fit(const PredictorContext& ctx, int node, const std::vector<int>& w_set,
                               const GlassoOptions& opt, const Eigen::VectorXd* warm_start = nullptr) {
  std::vector<int> all_e(static_cast<std::size_t>(ctx.p()));
  for (int s = 0; s < ctx.p(); ++s) all_e[static_cast<std::size_t>(s)] = s;
  const std::vector<int> cols = ctx.columns_for(w_set, all_e);
  const GramSystem sub = ctx.full_gram().subset(cols);

  std::vector<GroupSpec> groups;
  int off = 0;
  for (std::size_t i = 0; i < w_set.size(); ++i, off += ctx.order()) groups.push_back({off, ctx.order(), opt.penalize_g});
  for (int s = 0; s < ctx.p(); ++s, off += ctx.order()) groups.push_back({off, ctx.order(), true});

  GlassoResult res = glasso_solve(sub.gram, sub.cross.col(node), sub.yy(node), groups, opt, warm_start);
  for (int gi : res.active_groups)
    if (gi >= static_cast<int>(w_set.size())) res.active_e.push_back(gi - static_cast<int>(w_set.size()));
  return res;
}

inline std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int v = 0; v <= 2000; v += 25) grid.push_back(static_cast<double>(v));
  return grid;
}

struct LambdaChoice {
  double lambda = 0.0;
  std::vector<int> v_set;  // topology found at the chosen grid point
  // (lambda, selected noise set, validation rmse) per scored grid point
  std::vector<std::tuple<double, std::vector<int>, double>> table;
  std::vector<double> skipped;  // grid points whose fit failed
};

/// Grid search: fit at each penalty, freeze the implied topology, score it by
/// chronological cross-validation, keep the best (ties go to the larger
/// penalty). Failed grid points are skipped and recorded.
inline LambdaChoice tune_lambda(const PredictorContext& ctx, int node, const std::vector<int>& w_set,
                                const std::vector<double>& grid, GlassoOptions opt = {}) {
  if (grid.empty()) throw StructuralError("tune_lambda: empty grid");
  LambdaChoice choice;
  double best_rmse = std::numeric_limits<double>::infinity();
  Eigen::VectorXd warm;
  for (double lambda : grid) {
    GlassoOptions point = opt;
    point.lambda = lambda;
    std::vector<int> v_set;
    try {
      const GlassoResult fit = glasso_fit(ctx, node, w_set, point, warm.size() ? &warm : nullptr);
      warm = fit.eta;
      v_set = fit.active_e;
    } catch (const GlassoNonConvergence& err) {
      choice.skipped.push_back(lambda);
      warm = err.last.eta;
      continue;
    }
    const double rmse = score_candidate(ctx, node, w_set, v_set, SelectionCriterion::kCv);
    choice.table.emplace_back(lambda, v_set, rmse);
    if (rmse < best_rmse || (rmse == best_rmse && lambda > choice.lambda)) {
      best_rmse = rmse;
      choice.lambda = lambda;
      choice.v_set = v_set;
    }
  }
  if (choice.table.empty()) throw NumericalError("tune_lambda: every grid point failed");
  return choice;
}

}  // namespace netid
