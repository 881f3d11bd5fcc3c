#pragma once

// Reduction of the high-order structured model to parametric Box-Jenkins
// form: per-module null-space systems built from truncated series, a least
// squares initialization, and iteratively reweighted refinement.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netid/arx.hpp"

namespace netid {

struct BjOrders {
  int m_l = 2;  // module numerator
  int m_f = 2;  // module denominator
  int m_c = 1;  // noise numerator (past the fixed constant term)
  int m_d = 2;  // noise denominator
};

/// Lower-triangular Toeplitz with first column (series[0] .. series[rows-1]).
inline Eigen::MatrixXd toeplitz_lt(const std::vector<double>& series, int rows, int cols) {
  if (static_cast<int>(series.size()) < rows) throw StructuralError("toeplitz_lt: series shorter than rows");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j <= std::min(i, cols - 1); ++j) m(i, j) = series[static_cast<std::size_t>(i - j)];
  return m;
}

/// Static feedthrough recovered from the reconstructed innovation:
/// Gamma = (sum eps_b eps_a^T)(sum eps_a eps_a^T)^{-1}.
inline Eigen::MatrixXd gamma_estimate(const InnovationEstimate& innov) {
  const long rows = innov.eps.rows() - innov.t_begin;
  const int L = static_cast<int>(innov.eps.cols());
  const int p = innov.p;
  if (p == L) return Eigen::MatrixXd::Zero(0, p);
  const auto block = innov.eps.bottomRows(rows);
  const Eigen::MatrixXd cov_aa = block.leftCols(p).transpose() * block.leftCols(p);
  const Eigen::MatrixXd cov_ba = block.rightCols(L - p).transpose() * block.leftCols(p);
  Eigen::LLT<Eigen::MatrixXd> llt(cov_aa);
  if (llt.info() != Eigen::Success)
    throw NumericalError("gamma_estimate: innovation covariance is singular");
  return llt.solve(cov_ba.transpose()).transpose();
}

struct ModuleBlock {
  bool is_g;          // module (G) block vs noise (H) block
  int theta_offset;   // into the node's theta vector
  int series_offset;  // into the stacked eta target
  int input;          // w index or noise index, for error messages
};

/// One node's null-space system: the stacked series target, the
/// block-diagonal regressor Q, and the metadata needed to rebuild the
/// denominator Toeplitz weighting from any theta iterate.
struct NullspaceSystem {
  int node = 0;
  int n = 0;
  BjOrders orders;
  Eigen::MatrixXd q;
  Eigen::VectorXd eta;
  std::vector<ModuleBlock> blocks;

  int theta_size() const { return static_cast<int>(q.cols()); }

  /// Block-diagonal T(theta) with lower-triangular Toeplitz blocks of the
  /// monic denominators F (module blocks) and D (noise blocks).
  Eigen::MatrixXd weighting_toeplitz(const Eigen::VectorXd& theta) const {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(eta.size(), eta.size());
    for (const auto& b : blocks) {
      const int m_den = b.is_g ? orders.m_f : orders.m_d;
      std::vector<double> first(static_cast<std::size_t>(n), 0.0);
      first[0] = 1.0;
      for (int k = 1; k <= m_den && k < n; ++k) first[static_cast<std::size_t>(k)] = theta(b.theta_offset + k - 1);
      t.block(b.series_offset, b.series_offset, n, n) = toeplitz_lt(first, n, n);
    }
    return t;
  }
};

/// Series of a noise module including its fixed constant term: 1 on the
/// diagonal of the full-rank block, the feedthrough estimate on the rows
/// below, 0 elsewhere.
inline double noise_feedthrough(int node, int noise, int p, const Eigen::MatrixXd& gamma_hat) {
  if (node < p) return node == noise ? 1.0 : 0.0;
  return gamma_hat(node - p, noise);
}

/// Assembles the per-node system eta ~ Q(eta) theta from the structured
/// high-order fit. Rows cover lags 1..n of the polynomial identities
/// F*G - L = 0 and D*H - C = 0; the lag-0 rows are identities by
/// construction and carry no information.
inline NullspaceSystem build_nullspace(const StructuredPredictorModel& model, int node, const BjOrders& orders,
                                       const Eigen::MatrixXd& gamma_hat, int p) {
  const int n = model.n;
  if (n < std::max({orders.m_l, orders.m_f, orders.m_c, orders.m_d}) + 1)
    throw StructuralError("build_nullspace: order n too small for the requested module orders");
  const auto& w_set = model.topo.w_in[static_cast<std::size_t>(node)];
  const auto& e_set = model.topo.e_in[static_cast<std::size_t>(node)];
  const int n_modules = static_cast<int>(w_set.size() + e_set.size());
  const int g_cols = orders.m_f + orders.m_l;
  const int h_cols = orders.m_d + orders.m_c;

  NullspaceSystem sys;
  sys.node = node;
  sys.n = n;
  sys.orders = orders;
  sys.eta.resize(static_cast<long>(n) * n_modules);
  sys.q = Eigen::MatrixXd::Zero(static_cast<long>(n) * n_modules,
                                static_cast<long>(g_cols) * w_set.size() + static_cast<long>(h_cols) * e_set.size());

  int row = 0, col = 0;
  for (std::size_t i = 0; i < w_set.size(); ++i) {
    const Polynomial& g = model.g[static_cast<std::size_t>(node)][i];
    std::vector<double> series(static_cast<std::size_t>(n), 0.0);
    for (int k = 0; k < n; ++k) series[static_cast<std::size_t>(k)] = g.at(k);  // g.at(0) == 0
    for (int k = 0; k < n; ++k) sys.eta(row + k) = g.at(k + 1);
    sys.q.block(row, col, n, orders.m_f) = -toeplitz_lt(series, n, orders.m_f);
    sys.q.block(row, col + orders.m_f, n, orders.m_l).topLeftCorner(orders.m_l, orders.m_l) =
        Eigen::MatrixXd::Identity(orders.m_l, orders.m_l);
    sys.blocks.push_back({true, col, row, w_set[i]});
    row += n;
    col += g_cols;
  }
  for (std::size_t i = 0; i < e_set.size(); ++i) {
    const Polynomial& h = model.h[static_cast<std::size_t>(node)][i];
    std::vector<double> series(static_cast<std::size_t>(n), 0.0);
    series[0] = noise_feedthrough(node, e_set[i], p, gamma_hat);
    for (int k = 1; k < n; ++k) series[static_cast<std::size_t>(k)] = h.at(k);
    for (int k = 0; k < n; ++k) sys.eta(row + k) = h.at(k + 1);
    sys.q.block(row, col, n, orders.m_d) = -toeplitz_lt(series, n, orders.m_d);
    sys.q.block(row, col + orders.m_d, n, orders.m_c).topLeftCorner(orders.m_c, orders.m_c) =
        Eigen::MatrixXd::Identity(orders.m_c, orders.m_c);
    sys.blocks.push_back({false, col, row, e_set[i]});
    row += n;
    col += h_cols;
  }
  return sys;
}

/// Covariance of the high-order node estimate: sigma^2 (Phi^T Phi)^{-1}.
/// A near-singular Gram gets a small ridge; the flag reports it.
inline Eigen::MatrixXd nonparametric_covariance(const Eigen::MatrixXd& gram, double sigma2, bool* ridged = nullptr) {
  Eigen::MatrixXd g = gram;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
  const Eigen::VectorXd d = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-13 * d.maxCoeff()) {
    g.diagonal().array() += 1e-10 * gram.trace();
    ldlt.compute(g);
    if (ridged) *ridged = true;
    if (ldlt.info() != Eigen::Success) throw NumericalError("nonparametric_covariance: Gram not invertible");
  }
  Eigen::MatrixXd p = sigma2 * ldlt.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
  return 0.5 * (p + p.transpose());
}

namespace detail {

inline void require_full_rank_q(const NullspaceSystem& sys, const Eigen::MatrixXd& normal) {
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  const Eigen::VectorXd d = ldlt.vectorD();
  if (ldlt.info() == Eigen::Success && d.minCoeff() > 1e-12 * d.maxCoeff()) return;
  // Name the first deficient module block.
  for (const auto& b : sys.blocks) {
    const int cols = b.is_g ? sys.orders.m_f + sys.orders.m_l : sys.orders.m_d + sys.orders.m_c;
    const Eigen::MatrixXd qb = sys.q.block(b.series_offset, b.theta_offset, sys.n, cols);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(qb);
    if (svd.singularValues().minCoeff() <= 1e-12 * svd.singularValues().maxCoeff())
      throw NumericalError(std::string("nullspace system: rank-deficient ") + (b.is_g ? "module" : "noise") +
                           " block for input " + std::to_string(b.input + 1) + " of node " +
                           std::to_string(sys.node + 1));
  }
  throw NumericalError("nullspace system: rank-deficient Q for node " + std::to_string(sys.node + 1));
}

inline double cond_estimate_l1(const Eigen::MatrixXd& t) {
  const double norm_t = t.cwiseAbs().colwise().sum().maxCoeff();
  const Eigen::MatrixXd inv = t.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(t.rows(), t.cols()));
  const double norm_inv = inv.cwiseAbs().colwise().sum().maxCoeff();
  return norm_t * norm_inv;
}

}  // namespace detail

/// Plain or covariance-weighted least squares on eta ~ Q theta.
inline Eigen::VectorXd initial_theta(const NullspaceSystem& sys, const Eigen::MatrixXd* p_eta = nullptr) {
  if (sys.theta_size() == 0) return Eigen::VectorXd(0);
  if (!p_eta) {
    const Eigen::MatrixXd normal = sys.q.transpose() * sys.q;
    detail::require_full_rank_q(sys, normal);
    return Eigen::LDLT<Eigen::MatrixXd>(normal).solve(sys.q.transpose() * sys.eta);
  }
  Eigen::LLT<Eigen::MatrixXd> pllt(*p_eta);
  if (pllt.info() != Eigen::Success) throw NumericalError("initial_theta: weighting covariance not positive definite");
  const Eigen::MatrixXd pinv_q = pllt.solve(sys.q);
  const Eigen::MatrixXd normal = sys.q.transpose() * pinv_q;
  detail::require_full_rank_q(sys, normal);
  return Eigen::LDLT<Eigen::MatrixXd>(normal).solve(pinv_q.transpose() * sys.eta);
}

/// Dense weighting matrix T^{-1} P^{-1} T^{-T} for a given iterate.
inline Eigen::MatrixXd weighting(const NullspaceSystem& sys, const Eigen::VectorXd& theta,
                                 const Eigen::MatrixXd& p_eta) {
  const Eigen::MatrixXd t = sys.weighting_toeplitz(theta);
  Eigen::LLT<Eigen::MatrixXd> pllt(p_eta);
  if (pllt.info() != Eigen::Success) throw NumericalError("weighting: covariance not positive definite");
  const Eigen::MatrixXd tinv = t.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(t.rows(), t.cols()));
  Eigen::MatrixXd w = tinv * pllt.solve(tinv.transpose());
  return 0.5 * (w + w.transpose());
}

struct IterateResult {
  Eigen::VectorXd theta;
  int iterations = 0;
  bool converged = false;
  bool cond_stop = false;  // weighting became ill-conditioned; best iterate kept
  std::vector<double> step_norms;
};

/// Weighted refinement theta <- (Q^T W Q)^{-1} Q^T W eta with the weighting
/// rebuilt from the current iterate. Stops on the relative-change criterion,
/// on the iteration cap, or when the denominator Toeplitz goes numerically
/// singular (the last well-conditioned iterate is returned in that case).
inline IterateResult iterate_theta(const NullspaceSystem& sys, const Eigen::MatrixXd& p_eta,
                                   const Eigen::VectorXd& theta_init, double tol = 1e-4, int max_iter = 50,
                                   double cond_limit = 1e12) {
  IterateResult res;
  res.theta = theta_init;
  if (sys.theta_size() == 0) {
    res.converged = true;
    return res;
  }
  Eigen::LLT<Eigen::MatrixXd> pllt(p_eta);
  if (pllt.info() != Eigen::Success) throw NumericalError("iterate_theta: covariance not positive definite");

  for (int k = 1; k <= max_iter; ++k) {
    const Eigen::MatrixXd t = sys.weighting_toeplitz(res.theta);
    if (detail::cond_estimate_l1(t) > cond_limit) {
      res.cond_stop = true;
      return res;
    }
    const Eigen::MatrixXd x = t.transpose().triangularView<Eigen::Upper>().solve(sys.q);
    const Eigen::VectorXd u = t.transpose().triangularView<Eigen::Upper>().solve(sys.eta);
    const Eigen::MatrixXd pinv_x = pllt.solve(x);
    const Eigen::MatrixXd normal = x.transpose() * pinv_x;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    const bool broken = ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0;
    if (broken) {
      // A genuinely singular system fails up front; a collapse after valid
      // steps is a conditioning breakdown and keeps the best iterate.
      if (k == 1)
        throw NumericalError("iterate_theta: singular weighted normal matrix at node " + std::to_string(sys.node + 1));
      res.cond_stop = true;
      return res;
    }
    const Eigen::VectorXd next = ldlt.solve(pinv_x.transpose() * u);
    const double denom = std::max(res.theta.norm(), 1e-300);
    const double rel = (next - res.theta).norm() / denom;
    res.theta = next;
    res.iterations = k;
    res.step_norms.push_back(rel);
    if (rel < tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Parametric estimate container and conversions.

struct BjEstimate {
  BjOrders orders;
  PredictorTopology topo;
  int p = 0;
  std::vector<Eigen::VectorXd> theta;  // per node
  std::vector<Eigen::VectorXd> theta_initial;
  Eigen::MatrixXd gamma_hat;
  std::vector<int> iterations;
  std::vector<bool> converged;

  double distance_squared(const BjEstimate& other) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < theta.size(); ++j) acc += (theta[j] - other.theta[j]).squaredNorm();
    return acc;
  }
};

/// The true parameter stacking for a known network, used by benchmarks.
inline BjEstimate true_parameters(const NetworkModel& model, const BjOrders& orders) {
  const PredictorTopology topo = topology_from_model(model);
  BjEstimate est;
  est.orders = orders;
  est.topo = topo;
  est.p = model.p;
  est.gamma_hat = model.gamma();
  for (int j = 0; j < model.L; ++j) {
    std::vector<double> v;
    for (int l : topo.w_in[static_cast<std::size_t>(j)]) {
      const RationalTf& tf = model.G.at(j, l);
      if (tf.den.degree() > orders.m_f || tf.num.degree() > orders.m_l)
        throw StructuralError("true_parameters: module order too small for G entry");
      for (int k = 1; k <= orders.m_f; ++k) v.push_back(tf.den.at(k));
      for (int k = 1; k <= orders.m_l; ++k) v.push_back(tf.num.at(k));
    }
    for (int s : topo.e_in[static_cast<std::size_t>(j)]) {
      const RationalTf& tf = model.H.at(j, s);
      if (tf.den.degree() > orders.m_d || tf.num.degree() > orders.m_c)
        throw StructuralError("true_parameters: module order too small for H entry");
      for (int k = 1; k <= orders.m_d; ++k) v.push_back(tf.den.at(k));
      for (int k = 1; k <= orders.m_c; ++k) v.push_back(tf.num.at(k));
    }
    Eigen::VectorXd theta(static_cast<long>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) theta(static_cast<long>(i)) = v[i];
    est.theta.push_back(theta);
    est.theta_initial.push_back(theta);
    est.iterations.push_back(0);
    est.converged.push_back(true);
  }
  return est;
}

/// Rebuilds a simulatable network from a parametric estimate. The noise
/// covariance and the known excitation block are supplied by the caller.
inline NetworkModel to_network(const BjEstimate& est, const TfMatrix& known_r, const Eigen::MatrixXd& lambda_a) {
  NetworkModel model;
  model.L = static_cast<int>(est.theta.size());
  model.K = known_r.cols();
  model.p = est.p;
  model.G = TfMatrix(model.L, model.L);
  model.H = TfMatrix(model.L, est.p);
  model.R = known_r;
  model.lambda = lambda_a;
  const BjOrders& mo = est.orders;
  for (int j = 0; j < model.L; ++j) {
    const Eigen::VectorXd& th = est.theta[static_cast<std::size_t>(j)];
    int off = 0;
    for (int l : est.topo.w_in[static_cast<std::size_t>(j)]) {
      RationalTf tf;
      tf.den.coeffs.assign(static_cast<std::size_t>(mo.m_f) + 1, 0.0);
      tf.den.coeffs[0] = 1.0;
      tf.num.coeffs.assign(static_cast<std::size_t>(mo.m_l) + 1, 0.0);
      for (int k = 1; k <= mo.m_f; ++k) tf.den.coeffs[static_cast<std::size_t>(k)] = th(off + k - 1);
      for (int k = 1; k <= mo.m_l; ++k) tf.num.coeffs[static_cast<std::size_t>(k)] = th(off + mo.m_f + k - 1);
      model.G.set(j, l, std::move(tf));
      off += mo.m_f + mo.m_l;
    }
    for (int s : est.topo.e_in[static_cast<std::size_t>(j)]) {
      RationalTf tf;
      tf.den.coeffs.assign(static_cast<std::size_t>(mo.m_d) + 1, 0.0);
      tf.den.coeffs[0] = 1.0;
      tf.num.coeffs.assign(static_cast<std::size_t>(mo.m_c) + 1, 0.0);
      tf.num.coeffs[0] = noise_feedthrough(j, s, est.p, est.gamma_hat);
      for (int k = 1; k <= mo.m_d; ++k) tf.den.coeffs[static_cast<std::size_t>(k)] = th(off + k - 1);
      for (int k = 1; k <= mo.m_c; ++k) tf.num.coeffs[static_cast<std::size_t>(k)] = th(off + mo.m_d + k - 1);
      model.H.set(j, s, std::move(tf));
      off += mo.m_d + mo.m_c;
    }
  }
  return model;
}

}  // namespace netid
