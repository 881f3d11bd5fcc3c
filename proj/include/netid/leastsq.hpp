#pragma once

// Lagged-regressor designs and normal-equation machinery shared by the
// estimation steps. A design is a list of column groups (one signal column
// plus an inclusive lag range); Gram and cross products accumulate over row
// chunks so the full design matrix is never materialized on long records.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <vector>

#include "netid/errors.hpp"

namespace netid {

struct LagGroup {
  const Eigen::MatrixXd* series;  // signal source
  int col;                        // column within the source
  int lag_from;                   // lag k reads series(t - k, col)
  int lag_to;                     // inclusive, lag_to >= lag_from >= 0

  int cols() const { return lag_to - lag_from + 1; }
};

struct Target {
  const Eigen::MatrixXd* series;
  int col;
  const Eigen::VectorXd* offset = nullptr;  // known term subtracted from the target

  double value(long t) const {
    double v = (*series)(t, col);
    if (offset) v -= (*offset)(t);
    return v;
  }
};

struct Design {
  std::vector<LagGroup> groups;
  long t_begin = 0;  // usable window [t_begin, t_end)
  long t_end = 0;

  int cols() const {
    int c = 0;
    for (const auto& g : groups) c += g.cols();
    return c;
  }
  long rows() const { return t_end - t_begin; }

  void fill_row(long t, double* out) const {
    for (const auto& g : groups)
      for (int k = g.lag_from; k <= g.lag_to; ++k) *out++ = (*g.series)(t - k, g.col);
  }

  Eigen::MatrixXd materialize() const {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(rows(), cols());
    for (long t = t_begin; t < t_end; ++t) fill_row(t, m.row(t - t_begin).data());
    return m;
  }

  /// Column offset of group g within the design.
  int group_offset(std::size_t g) const {
    int c = 0;
    for (std::size_t i = 0; i < g; ++i) c += groups[i].cols();
    return c;
  }
};

/// Normal-equation data: gram = Phi^T Phi, cross = Phi^T Y, yy = diag(Y^T Y).
struct GramSystem {
  Eigen::MatrixXd gram;
  Eigen::MatrixXd cross;
  Eigen::VectorXd yy;
  long rows = 0;

  GramSystem subset(const std::vector<int>& cols) const {
    GramSystem out;
    const int m = static_cast<int>(cols.size());
    out.gram.resize(m, m);
    out.cross.resize(m, cross.cols());
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) out.gram(i, j) = gram(cols[static_cast<std::size_t>(i)], cols[static_cast<std::size_t>(j)]);
      out.cross.row(i) = cross.row(cols[static_cast<std::size_t>(i)]);
    }
    out.yy = yy;
    out.rows = rows;
    return out;
  }

  /// this - other, for carving a validation window out of a full window.
  GramSystem minus(const GramSystem& other) const {
    GramSystem out;
    out.gram = gram - other.gram;
    out.cross = cross - other.cross;
    out.yy = yy - other.yy;
    out.rows = rows - other.rows;
    return out;
  }
};

inline GramSystem accumulate_gram(const Design& design, const std::vector<Target>& targets,
                                  long chunk_rows = 2048) {
  const int cols = design.cols();
  const int nt = static_cast<int>(targets.size());
  GramSystem sys;
  sys.gram = Eigen::MatrixXd::Zero(cols, cols);
  sys.cross = Eigen::MatrixXd::Zero(cols, nt);
  sys.yy = Eigen::VectorXd::Zero(nt);
  sys.rows = design.rows();

  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> chunk(chunk_rows, cols);
  Eigen::MatrixXd ychunk(chunk_rows, nt);
  for (long t0 = design.t_begin; t0 < design.t_end; t0 += chunk_rows) {
    const long m = std::min(chunk_rows, design.t_end - t0);
    for (long i = 0; i < m; ++i) {
      design.fill_row(t0 + i, chunk.row(i).data());
      for (int y = 0; y < nt; ++y) ychunk(i, y) = targets[static_cast<std::size_t>(y)].value(t0 + i);
    }
    sys.gram.selfadjointView<Eigen::Lower>().rankUpdate(chunk.topRows(m).transpose(), 1.0);
    sys.cross.noalias() += chunk.topRows(m).transpose() * ychunk.topRows(m);
    sys.yy += ychunk.topRows(m).colwise().squaredNorm();
  }
  sys.gram.triangularView<Eigen::Upper>() = sys.gram.transpose();
  return sys;
}

struct LsOptions {
  double rank_tol = 1e-13;     // relative pivot cutoff declaring deficiency
  double ridge_scale = 1e-10;  // ridge = ridge_scale * trace, deficient case only
};

struct LsSolution {
  Eigen::MatrixXd coeffs;  // cols x targets
  bool rank_deficient = false;
  double cond = 0.0;  // pivot-ratio estimate
  double ridge = 0.0;
};

/// Solves gram * c = rhs for each rhs column. A rank-deficient system falls
/// back to a small ridge, which approximates the minimum-norm solution while
/// leaving the fitted values (and hence residuals) essentially unchanged.
inline LsSolution solve_normal(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& rhs, LsOptions opt = {}) {
  LsSolution out;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Eigen::VectorXd d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  out.cond = (dmin > 0.0) ? dmax / dmin : std::numeric_limits<double>::infinity();
  if (ldlt.info() != Eigen::Success || dmax <= 0.0 || dmin <= opt.rank_tol * dmax) {
    out.rank_deficient = true;
    out.ridge = opt.ridge_scale * gram.trace();
    if (out.ridge <= 0.0) out.ridge = opt.ridge_scale;
    Eigen::MatrixXd reg = gram;
    reg.diagonal().array() += out.ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(reg);
    if (llt.info() != Eigen::Success) throw NumericalError("solve_normal: regularized system still singular");
    out.coeffs = llt.solve(rhs);
    return out;
  }
  out.coeffs = ldlt.solve(rhs);
  return out;
}

/// Residual sum of squares from the normal-equation identity.
inline double ssr_from_gram(const GramSystem& sys, int target, const Eigen::VectorXd& coeffs) {
  const double v = sys.yy(target) - 2.0 * coeffs.dot(sys.cross.col(target)) +
                   coeffs.dot(sys.gram.selfadjointView<Eigen::Lower>() * coeffs);
  return std::max(v, 0.0);
}

/// Residual series over [0, n_full): zero outside the design window.
inline Eigen::VectorXd residual_series(const Design& design, const Target& target, const Eigen::VectorXd& coeffs,
                                       long n_full, long chunk_rows = 2048) {
  Eigen::VectorXd eps = Eigen::VectorXd::Zero(n_full);
  const int cols = design.cols();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> chunk(chunk_rows, cols);
  for (long t0 = design.t_begin; t0 < design.t_end; t0 += chunk_rows) {
    const long m = std::min(chunk_rows, design.t_end - t0);
    for (long i = 0; i < m; ++i) design.fill_row(t0 + i, chunk.row(i).data());
    Eigen::VectorXd fitted = chunk.topRows(m) * coeffs;
    for (long i = 0; i < m; ++i) eps(t0 + i) = target.value(t0 + i) - fitted(i);
  }
  return eps;
}

}  // namespace netid
