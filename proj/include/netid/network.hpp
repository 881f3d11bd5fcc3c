#pragma once

// Network data model: sparse matrices of rational filters (G, H, R), the
// noise covariance, and the measured-signal container.

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "netid/errors.hpp"
#include "netid/polynomial.hpp"

namespace netid {

/// Dense-indexed matrix of optional rational filters; absent means zero.
class TfMatrix {
 public:
  TfMatrix() = default;
  TfMatrix(int rows, int cols) : rows_(rows), cols_(cols), m_(static_cast<std::size_t>(rows) * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  bool present(int i, int j) const { return m_[idx(i, j)].has_value(); }
  const RationalTf& at(int i, int j) const { return *m_[idx(i, j)]; }
  void set(int i, int j, RationalTf tf) { m_[idx(i, j)] = std::move(tf); }
  void clear(int i, int j) { m_[idx(i, j)].reset(); }

 private:
  std::size_t idx(int i, int j) const {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_) throw StructuralError("TfMatrix: index out of range");
    return static_cast<std::size_t>(i) * cols_ + j;
  }
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::optional<RationalTf>> m_;
};

/// The data generating structure: w = G w + R r + H e with e of rank p <= L.
/// Nodes are assumed ordered so the top p x p block of H is the full-rank
/// (monic) part; reordering of raw data is handled at estimation time.
struct NetworkModel {
  int L = 0;
  int K = 0;
  int p = 0;
  TfMatrix G;               // L x L, zero diagonal, strictly proper entries
  TfMatrix H;               // L x p
  TfMatrix R;               // L x K, known
  Eigen::MatrixXd lambda;   // p x p noise covariance

  /// Feedthrough of the lower (L-p) x p block of H.
  Eigen::MatrixXd gamma() const {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(L - p, p);
    for (int j = p; j < L; ++j)
      for (int s = 0; s < p; ++s)
        if (H.present(j, s)) g(j - p, s) = H.at(j, s).feedthrough();
    return g;
  }
};

inline void validate(const NetworkModel& model) {
  if (model.L <= 0 || model.p < 0 || model.p > model.L || model.K < 0)
    throw StructuralError("model: inconsistent dimensions");
  if (model.G.rows() != model.L || model.G.cols() != model.L) throw StructuralError("model: G must be L x L");
  if (model.H.rows() != model.L || model.H.cols() != model.p) throw StructuralError("model: H must be L x p");
  if (model.R.rows() != model.L || model.R.cols() != model.K) throw StructuralError("model: R must be L x K");
  for (int j = 0; j < model.L; ++j) {
    if (model.G.present(j, j)) throw StructuralError("model: G has a self-loop at node " + std::to_string(j + 1));
    for (int l = 0; l < model.L; ++l)
      if (model.G.present(j, l)) {
        const RationalTf& tf = model.G.at(j, l);
        require_monic_den(tf, "model G entry");
        if (!tf.num.strictly_proper_as_numerator())
          throw StructuralError("model: G entry (" + std::to_string(j + 1) + "," + std::to_string(l + 1) +
                                ") must be strictly proper");
      }
    for (int s = 0; s < model.p; ++s)
      if (model.H.present(j, s)) require_monic_den(model.H.at(j, s), "model H entry");
    for (int k = 0; k < model.K; ++k)
      if (model.R.present(j, k)) require_monic_den(model.R.at(j, k), "model R entry");
  }
  if (model.lambda.rows() != model.p || model.lambda.cols() != model.p)
    throw StructuralError("model: Lambda must be p x p");
  if (!model.lambda.isApprox(model.lambda.transpose(), 1e-12))
    throw StructuralError("model: Lambda must be symmetric");
}

/// The square monic reordering of H: [[H_a, 0], [H_b - Gamma, I]].
/// Requires the top block's feedthrough to be the identity already.
inline TfMatrix build_check_H(const NetworkModel& model) {
  const int L = model.L;
  const int p = model.p;
  for (int j = 0; j < p; ++j)
    for (int s = 0; s < p; ++s) {
      const double want = (j == s) ? 1.0 : 0.0;
      const double got = model.H.present(j, s) ? model.H.at(j, s).feedthrough() : 0.0;
      if (std::abs(got - want) > 1e-12)
        throw StructuralError("build_check_H: feedthrough of the top block is not identity at (" +
                              std::to_string(j + 1) + "," + std::to_string(s + 1) + ")");
    }
  TfMatrix out(L, L);
  for (int j = 0; j < p; ++j)
    for (int s = 0; s < p; ++s)
      if (model.H.present(j, s)) out.set(j, s, model.H.at(j, s));
  const Eigen::MatrixXd gam = model.gamma();
  for (int j = p; j < L; ++j) {
    for (int s = 0; s < p; ++s) {
      const double g = gam(j - p, s);
      if (model.H.present(j, s)) {
        RationalTf adj = sub_const(model.H.at(j, s), g);
        if (!adj.num.is_zero()) out.set(j, s, std::move(adj));
      } else if (g != 0.0) {
        throw StructuralError("build_check_H: inconsistent feedthrough");  // unreachable by construction
      }
    }
    out.set(j, j, tf_one());
  }
  return out;
}

/// Covariance of the reordered innovation: [I; Gamma] Lambda [I; Gamma]^T.
inline Eigen::MatrixXd check_lambda(const NetworkModel& model) {
  const int L = model.L;
  const int p = model.p;
  Eigen::MatrixXd stack(L, p);
  stack.topRows(p) = Eigen::MatrixXd::Identity(p, p);
  if (L > p) stack.bottomRows(L - p) = model.gamma();
  return stack * model.lambda * stack.transpose();
}

/// Time-aligned node records. Columns of w follow node_order, a permutation
/// of the original node labels (0-based); e_true keeps the generator's
/// noise-source order regardless of node_order.
struct Dataset {
  Eigen::MatrixXd w;                      // N x L
  Eigen::MatrixXd r;                      // N x K
  std::optional<Eigen::MatrixXd> e_true;  // N x p, simulation ground truth
  std::vector<int> node_order;            // size L

  long N() const { return w.rows(); }
  int L() const { return static_cast<int>(w.cols()); }
  int K() const { return static_cast<int>(r.cols()); }
};

inline void validate(const Dataset& data) {
  if (data.w.rows() == 0) throw StructuralError("dataset: empty");
  if (data.r.cols() > 0 && data.r.rows() != data.w.rows()) throw StructuralError("dataset: w/r length mismatch");
  if (data.e_true && data.e_true->rows() != data.w.rows()) throw StructuralError("dataset: w/e length mismatch");
  if (static_cast<int>(data.node_order.size()) != data.L()) throw StructuralError("dataset: node_order size");
  std::vector<bool> seen(data.node_order.size(), false);
  for (int v : data.node_order) {
    if (v < 0 || v >= data.L() || seen[static_cast<std::size_t>(v)])
      throw StructuralError("dataset: node_order is not a permutation");
    seen[static_cast<std::size_t>(v)] = true;
  }
}

/// Reorders node columns of a dataset: new column i holds old column perm[i].
/// node_order is composed so it always maps back to the original labels.
inline Dataset permute_nodes(const Dataset& data, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != data.L()) throw StructuralError("permute_nodes: size mismatch");
  Dataset out = data;
  for (int i = 0; i < data.L(); ++i) {
    out.w.col(i) = data.w.col(perm[static_cast<std::size_t>(i)]);
    out.node_order[static_cast<std::size_t>(i)] = data.node_order[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
  }
  return out;
}

/// Reorders model rows/columns consistently with a node permutation.
/// H columns are left untouched: noise sources keep their own indexing.
inline NetworkModel permute_nodes(const NetworkModel& model, const std::vector<int>& perm) {
  NetworkModel out = model;
  out.G = TfMatrix(model.L, model.L);
  out.H = TfMatrix(model.L, model.p);
  out.R = TfMatrix(model.L, model.K);
  for (int j = 0; j < model.L; ++j) {
    const int pj = perm[static_cast<std::size_t>(j)];
    for (int l = 0; l < model.L; ++l)
      if (model.G.present(pj, perm[static_cast<std::size_t>(l)])) out.G.set(j, l, model.G.at(pj, perm[static_cast<std::size_t>(l)]));
    for (int s = 0; s < model.p; ++s)
      if (model.H.present(pj, s)) out.H.set(j, s, model.H.at(pj, s));
    for (int k = 0; k < model.K; ++k)
      if (model.R.present(pj, k)) out.R.set(j, k, model.R.at(pj, k));
  }
  return out;
}

}  // namespace netid
