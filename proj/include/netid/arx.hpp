#pragma once

// High-order ARX estimation by per-node linear regression: the unstructured
// first pass, the variant with the known excitation block held fixed, and
// the structured predictor fits on reconstructed innovations.

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "netid/leastsq.hpp"
#include "netid/network.hpp"

namespace netid {

/// Which signals feed each node's predictor: w_in from the known network
/// topology, e_in the (estimated or true) disturbance topology, r_in the
/// known excitation pattern. All index sets are 0-based and sorted.
struct PredictorTopology {
  std::vector<std::vector<int>> w_in;
  std::vector<std::vector<int>> e_in;
  std::vector<std::vector<int>> r_in;
};

inline PredictorTopology topology_from_model(const NetworkModel& model) {
  PredictorTopology topo;
  topo.w_in.resize(static_cast<std::size_t>(model.L));
  topo.e_in.resize(static_cast<std::size_t>(model.L));
  topo.r_in.resize(static_cast<std::size_t>(model.L));
  for (int j = 0; j < model.L; ++j) {
    for (int l = 0; l < model.L; ++l)
      if (model.G.present(j, l)) topo.w_in[static_cast<std::size_t>(j)].push_back(l);
    for (int s = 0; s < model.p; ++s)
      if (model.H.present(j, s)) topo.e_in[static_cast<std::size_t>(j)].push_back(s);
    for (int k = 0; k < model.K; ++k)
      if (model.R.present(j, k)) topo.r_in[static_cast<std::size_t>(j)].push_back(k);
  }
  return topo;
}

struct ArxModel {
  int n = 0;
  std::vector<std::vector<Polynomial>> A;  // L x L, monic diagonal of order n
  std::vector<std::vector<Polynomial>> B;  // L x K, orders 0..n-1
  std::vector<std::vector<bool>> b_known;  // true where B is fixed by structure
  // Free parameters per node in predictor convention: the w-lag block holds
  // -a_k, the excitation block holds b_k. Known entries are excluded.
  Eigen::VectorXd zeta;
};

struct InnovationEstimate {
  Eigen::MatrixXd eps;  // N x L, rows before t_begin are zero
  int p = 0;            // eps_a = first p columns, eps_b = the rest
  long t_begin = 0;

  Eigen::MatrixXd eps_a() const { return eps.leftCols(p); }
  Eigen::MatrixXd eps_b() const { return eps.rightCols(eps.cols() - p); }
};

struct FitDiagnostics {
  std::string step;
  std::vector<double> residual_variance;  // per node
  std::vector<int> n_params;              // per node
  double cond_max = 0.0;
  bool rank_deficient = false;
  double ridge = 0.0;
};

struct StructuredPredictorModel {
  int n = 0;
  PredictorTopology topo;
  std::vector<std::vector<Polynomial>> g;  // per node, parallel to topo.w_in[j]; strictly proper
  std::vector<std::vector<Polynomial>> h;  // per node, parallel to topo.e_in[j]; strictly proper
  Eigen::VectorXd eta;                     // all free parameters, per-node blocks
};

/// Sum over known excitation filters, per node: (R r)_j as a series. Columns
/// may be restricted to k >= k_from.
inline Eigen::MatrixXd known_excitation_term(const NetworkModel& model, const Dataset& data, int k_from = 0) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(data.N(), model.L);
  for (int j = 0; j < model.L; ++j)
    for (int k = k_from; k < model.K; ++k)
      if (model.R.present(j, k)) {
        std::vector<double> u(static_cast<std::size_t>(data.N()));
        for (long t = 0; t < data.N(); ++t) u[static_cast<std::size_t>(t)] = data.r(t, k);
        const std::vector<double> y = filter(model.R.at(j, k), u);
        for (long t = 0; t < data.N(); ++t) out(t, j) += y[static_cast<std::size_t>(t)];
      }
  return out;
}

/// Splits the excitation columns into the block feeding the first p nodes
/// and the block feeding the rest; fails if R is not block diagonal.
inline int excitation_split(const NetworkModel& model, int p) {
  int k_a = 0;
  for (int j = 0; j < p; ++j)
    for (int k = 0; k < model.K; ++k)
      if (model.R.present(j, k)) k_a = std::max(k_a, k + 1);
  for (int j = p; j < model.L; ++j)
    for (int k = 0; k < k_a; ++k)
      if (model.R.present(j, k))
        throw StructuralError("excitation_split: R is not block diagonal at row " + std::to_string(j + 1));
  return k_a;
}

// ---------------------------------------------------------------------------
// Explicit regressor construction (small-scale path, also the test oracle
// surface). Signals: w and reconstructed-innovation inputs use lags 1..n,
// excitation inputs use lags 0..n-1.

struct SignalRef {
  enum Kind { kW, kR, kEps } kind;
  int index;
};

inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> regressor_matrix(const Dataset& data, int node, int n,
                                                                    const std::vector<SignalRef>& inputs,
                                                                    const Eigen::VectorXd* known_offset = nullptr,
                                                                    const Eigen::MatrixXd* eps_a = nullptr) {
  Design design;
  for (const auto& in : inputs) {
    switch (in.kind) {
      case SignalRef::kW:
        design.groups.push_back({&data.w, in.index, 1, n});
        break;
      case SignalRef::kR:
        design.groups.push_back({&data.r, in.index, 0, n - 1});
        break;
      case SignalRef::kEps:
        if (!eps_a) throw StructuralError("regressor_matrix: eps inputs need an innovation matrix");
        design.groups.push_back({eps_a, in.index, 1, n});
        break;
    }
  }
  design.t_begin = n;
  design.t_end = data.N();
  if (design.rows() <= design.cols())
    throw NumericalError("regressor_matrix: more parameters than usable rows");
  Eigen::MatrixXd phi = design.materialize();
  Eigen::VectorXd target(design.rows());
  for (long t = design.t_begin; t < design.t_end; ++t) {
    double v = data.w(t, node);
    if (known_offset) v -= (*known_offset)(t);
    target(t - design.t_begin) = v;
  }
  return {std::move(phi), std::move(target)};
}

// ---------------------------------------------------------------------------
// Step 1: fully parametrized ARX over all nodes, shared design.

struct ArxFit {
  ArxModel model;
  InnovationEstimate innov;
  FitDiagnostics diag;
};

namespace detail {

inline ArxFit fit_arx_common(const Dataset& data, int n, int k_free, const Eigen::MatrixXd& offsets,
                             const NetworkModel* model_for_known, const char* step) {
  const int L = data.L();
  const long N = data.N();
  if (N <= n + 1) throw StructuralError("fit_arx: record too short for order n");

  Design design;
  for (int l = 0; l < L; ++l) design.groups.push_back({&data.w, l, 1, n});
  for (int k = 0; k < k_free; ++k) design.groups.push_back({&data.r, k, 0, n - 1});
  design.t_begin = n;
  design.t_end = N;

  std::vector<Eigen::VectorXd> offset_cols;
  std::vector<Target> targets;
  offset_cols.reserve(static_cast<std::size_t>(L));
  for (int j = 0; j < L; ++j) offset_cols.emplace_back(offsets.col(j));
  for (int j = 0; j < L; ++j) {
    Target tgt{&data.w, j, nullptr};
    if (offset_cols[static_cast<std::size_t>(j)].cwiseAbs().maxCoeff() > 0.0) tgt.offset = &offset_cols[static_cast<std::size_t>(j)];
    targets.push_back(tgt);
  }

  const GramSystem sys = accumulate_gram(design, targets);
  const LsSolution sol = solve_normal(sys.gram, sys.cross);

  ArxFit fit;
  fit.model.n = n;
  fit.model.A.assign(static_cast<std::size_t>(L), std::vector<Polynomial>(static_cast<std::size_t>(L)));
  fit.model.B.assign(static_cast<std::size_t>(L), std::vector<Polynomial>(static_cast<std::size_t>(data.K())));
  fit.model.b_known.assign(static_cast<std::size_t>(L), std::vector<bool>(static_cast<std::size_t>(data.K()), false));
  fit.diag.step = step;
  fit.diag.cond_max = sol.cond;
  fit.diag.rank_deficient = sol.rank_deficient;
  fit.diag.ridge = sol.ridge;

  const int cols = design.cols();
  fit.model.zeta.resize(static_cast<long>(cols) * L);
  fit.innov.eps = Eigen::MatrixXd::Zero(N, L);
  fit.innov.p = L;
  fit.innov.t_begin = n;

  for (int j = 0; j < L; ++j) {
    const Eigen::VectorXd c = sol.coeffs.col(j);
    // Predictor coefficient on w_l(t-k) is -a_k; on r_k(t-d) it is b_d.
    for (int l = 0; l < L; ++l) {
      std::vector<double> a(static_cast<std::size_t>(n) + 1, 0.0);
      a[0] = (l == j) ? 1.0 : 0.0;
      for (int k = 1; k <= n; ++k) a[static_cast<std::size_t>(k)] = -c(static_cast<long>(l) * n + k - 1);
      fit.model.A[static_cast<std::size_t>(j)][static_cast<std::size_t>(l)] = Polynomial(std::move(a));
    }
    for (int k = 0; k < k_free; ++k) {
      std::vector<double> b(static_cast<std::size_t>(n), 0.0);
      for (int d = 0; d < n; ++d) b[static_cast<std::size_t>(d)] = c(static_cast<long>(L) * n + static_cast<long>(k) * n + d);
      fit.model.B[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = Polynomial(std::move(b));
    }
    if (model_for_known) {
      for (int k = k_free; k < model_for_known->K; ++k) {
        fit.model.b_known[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = true;
        if (model_for_known->R.present(j, k))
          fit.model.B[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = impulse_response(model_for_known->R.at(j, k), n);
      }
    }
    fit.model.zeta.segment(static_cast<long>(j) * cols, cols) = c;
    fit.innov.eps.col(j) = residual_series(design, targets[static_cast<std::size_t>(j)], c, N);
    const double ssr = fit.innov.eps.col(j).squaredNorm();
    fit.diag.residual_variance.push_back(ssr / static_cast<double>(design.rows()));
    fit.diag.n_params.push_back(cols);
  }
  return fit;
}

}  // namespace detail

/// Fully parametrized high-order ARX, one least-squares problem per node
/// with a shared regressor. Residuals are the reconstructed innovation.
inline ArxFit fit_arx_step1(const Dataset& data, int n) {
  Eigen::MatrixXd zero_offsets = Eigen::MatrixXd::Zero(data.N(), data.L());
  return detail::fit_arx_common(data, n, data.K(), zero_offsets, nullptr, "step1");
}

/// Covariance of the reconstructed innovation over the usable window.
inline Eigen::MatrixXd residual_covariance(const InnovationEstimate& innov) {
  const long rows = innov.eps.rows() - innov.t_begin;
  if (rows < innov.eps.cols()) throw StructuralError("residual_covariance: window shorter than dimension");
  const auto block = innov.eps.bottomRows(rows);
  return (block.transpose() * block) / static_cast<double>(rows);
}

/// Re-fit with the excitation block feeding the last L-p nodes held at its
/// known value: those columns leave the parameter vector and their
/// contribution moves into the regression target.
inline ArxFit fit_arx_step21(const Dataset& data, int n, int p, const NetworkModel& model) {
  if (p == data.L()) return detail::fit_arx_common(data, n, data.K(), Eigen::MatrixXd::Zero(data.N(), data.L()), nullptr, "step2.1");
  const int k_a = excitation_split(model, p);
  Eigen::MatrixXd offsets = known_excitation_term(model, data, k_a);
  ArxFit fit = detail::fit_arx_common(data, n, k_a, offsets, &model, "step2.1");
  fit.innov.p = p;
  return fit;
}

// ---------------------------------------------------------------------------
// Structured predictor fits (shared-regressor context).

/// Owns the signals entering the structured one-step-ahead predictor and the
/// Gram systems over them, so node-wise and candidate-wise fits reduce to
/// principal submatrices of one factorization-ready system.
class PredictorContext {
 public:
  PredictorContext(const Dataset& data, const NetworkModel& model, Eigen::MatrixXd eps_a, int n)
      : data_(&data), model_(&model), eps_a_(std::move(eps_a)), n_(n) {
    if (eps_a_.rows() != data.N()) throw StructuralError("PredictorContext: innovation length mismatch");
    p_ = static_cast<int>(eps_a_.cols());
    known_r_ = known_excitation_term(model, data);
    offsets_.reserve(static_cast<std::size_t>(data.L()));
    for (int j = 0; j < data.L(); ++j) offsets_.emplace_back(known_r_.col(j));
    split_ = (2 * (data.N() + 1)) / 3;
    if (split_ <= n_) split_ = std::min<long>(n_ + 1, data.N());
  }

  const Dataset& data() const { return *data_; }
  const NetworkModel& model() const { return *model_; }
  const Eigen::MatrixXd& eps_a() const { return eps_a_; }
  int order() const { return n_; }
  int p() const { return p_; }
  long split() const { return split_; }

  /// Columns of the shared design covering the given input sets.
  std::vector<int> columns_for(const std::vector<int>& w_set, const std::vector<int>& e_set) const {
    std::vector<int> cols;
    for (int l : w_set)
      for (int k = 0; k < n_; ++k) cols.push_back(l * n_ + k);
    for (int s : e_set)
      for (int k = 0; k < n_; ++k) cols.push_back((data_->L() + s) * n_ + k);
    return cols;
  }

  Design node_design(const std::vector<int>& w_set, const std::vector<int>& e_set) const {
    Design d;
    for (int l : w_set) d.groups.push_back({&data_->w, l, 1, n_});
    for (int s : e_set) d.groups.push_back({&eps_a_, s, 1, n_});
    d.t_begin = n_;
    d.t_end = data_->N();
    return d;
  }

  Target node_target(int j) const { return Target{&data_->w, j, &offsets_[static_cast<std::size_t>(j)]}; }

  const GramSystem& full_gram() const {
    if (full_.rows == 0) full_ = accumulate(n_, data_->N());
    return full_;
  }
  const GramSystem& train_gram() const {
    if (train_.rows == 0) train_ = accumulate(n_, split_);
    return train_;
  }

 private:
  GramSystem accumulate(long t0, long t1) const {
    Design d;
    for (int l = 0; l < data_->L(); ++l) d.groups.push_back({&data_->w, l, 1, n_});
    for (int s = 0; s < p_; ++s) d.groups.push_back({&eps_a_, s, 1, n_});
    d.t_begin = t0;
    d.t_end = t1;
    std::vector<Target> targets;
    for (int j = 0; j < data_->L(); ++j) targets.push_back(node_target(j));
    return accumulate_gram(d, targets);
  }

  const Dataset* data_;
  const NetworkModel* model_;
  Eigen::MatrixXd eps_a_;
  Eigen::MatrixXd known_r_;
  std::vector<Eigen::VectorXd> offsets_;
  int n_;
  int p_;
  long split_;
  mutable GramSystem full_;
  mutable GramSystem train_;
};

struct StructuredFit {
  StructuredPredictorModel model;
  InnovationEstimate innov;
  FitDiagnostics diag;
  std::vector<double> sigma2;             // per node residual variance
  std::vector<std::vector<int>> columns;  // per node, into the shared design
};

/// Node-wise least squares of the structured predictor; the known excitation
/// term sits in the target, only topology-selected inputs carry parameters.
inline StructuredFit fit_structured(const PredictorContext& ctx, const PredictorTopology& topo) {
  const Dataset& data = ctx.data();
  const int L = data.L();
  const int n = ctx.order();

  StructuredFit fit;
  fit.model.n = n;
  fit.model.topo = topo;
  fit.model.g.resize(static_cast<std::size_t>(L));
  fit.model.h.resize(static_cast<std::size_t>(L));
  fit.diag.step = "structured";
  fit.innov.eps = Eigen::MatrixXd::Zero(data.N(), L);
  fit.innov.p = ctx.p();
  fit.innov.t_begin = n;

  std::vector<double> eta_flat;
  for (int j = 0; j < L; ++j) {
    const auto& w_set = topo.w_in[static_cast<std::size_t>(j)];
    const auto& e_set = topo.e_in[static_cast<std::size_t>(j)];
    const std::vector<int> cols = ctx.columns_for(w_set, e_set);
    fit.columns.push_back(cols);
    fit.diag.n_params.push_back(static_cast<int>(cols.size()));
    const Target tgt = ctx.node_target(j);

    Eigen::VectorXd c;
    if (!cols.empty()) {
      const GramSystem sub = ctx.full_gram().subset(cols);
      const LsSolution sol = solve_normal(sub.gram, sub.cross.col(j));
      c = sol.coeffs.col(0);
      fit.diag.cond_max = std::max(fit.diag.cond_max, sol.cond);
      fit.diag.rank_deficient = fit.diag.rank_deficient || sol.rank_deficient;
      fit.diag.ridge = std::max(fit.diag.ridge, sol.ridge);
      fit.innov.eps.col(j) = residual_series(ctx.node_design(w_set, e_set), tgt, c, data.N());
    } else {
      // No free parameters: the residual is the offset-corrected signal.
      c.resize(0);
      for (long t = n; t < data.N(); ++t) fit.innov.eps(t, j) = tgt.value(t);
    }

    for (std::size_t i = 0; i < w_set.size(); ++i) {
      std::vector<double> g(static_cast<std::size_t>(n) + 1, 0.0);
      for (int k = 1; k <= n; ++k) g[static_cast<std::size_t>(k)] = c(static_cast<long>(i) * n + k - 1);
      fit.model.g[static_cast<std::size_t>(j)].push_back(Polynomial(std::move(g)));
    }
    for (std::size_t i = 0; i < e_set.size(); ++i) {
      std::vector<double> h(static_cast<std::size_t>(n) + 1, 0.0);
      for (int k = 1; k <= n; ++k)
        h[static_cast<std::size_t>(k)] = c((static_cast<long>(w_set.size()) + static_cast<long>(i)) * n + k - 1);
      fit.model.h[static_cast<std::size_t>(j)].push_back(Polynomial(std::move(h)));
    }
    for (long i = 0; i < c.size(); ++i) eta_flat.push_back(c(i));

    const double ssr = fit.innov.eps.col(j).squaredNorm();
    const double var = ssr / static_cast<double>(data.N() - n);
    fit.sigma2.push_back(var);
    fit.diag.residual_variance.push_back(var);
  }
  fit.model.eta.resize(static_cast<long>(eta_flat.size()));
  for (std::size_t i = 0; i < eta_flat.size(); ++i) fit.model.eta(static_cast<long>(i)) = eta_flat[i];
  return fit;
}

/// Two-pass refinement: fit on the supplied innovation, rebuild the
/// innovation from the residuals, fit again. The second-pass fit seeds the
/// parametric reduction; the returned context owns its innovation signal.
struct RefinedFit {
  StructuredFit fit;
  std::unique_ptr<PredictorContext> ctx;  // context of the second pass
  FitDiagnostics first_pass_diag;
};

inline RefinedFit refine_step31(const Dataset& data, const NetworkModel& model, const Eigen::MatrixXd& eps_a_in,
                                const PredictorTopology& topo, int n, bool single_pass = false) {
  RefinedFit out;
  PredictorContext ctx1(data, model, eps_a_in, n);
  StructuredFit pass1 = fit_structured(ctx1, topo);
  out.first_pass_diag = pass1.diag;
  out.first_pass_diag.step = "step3.1a";
  if (single_pass) {
    out.ctx = std::make_unique<PredictorContext>(data, model, eps_a_in, n);
    out.fit = std::move(pass1);
    out.fit.diag.step = "step3.1";
    return out;
  }
  out.ctx = std::make_unique<PredictorContext>(data, model, pass1.innov.eps_a(), n);
  out.fit = fit_structured(*out.ctx, topo);
  out.fit.diag.step = "step3.1";
  return out;
}

}  // namespace netid
