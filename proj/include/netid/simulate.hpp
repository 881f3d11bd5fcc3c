#pragma once

// Deterministic time-domain simulation of w = G w + R r + H e. Strict
// properness of G makes the loop explicit sample by sample, so no transfer
// matrix is ever inverted.

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cstdint>
#include <vector>

#include "netid/network.hpp"
#include "netid/rng.hpp"

namespace netid {

constexpr double kDivergenceGuard = 1e12;
constexpr int kDefaultBurnIn = 500;

namespace detail {

/// Square root factor of a PSD covariance: Cholesky when positive definite,
/// eigenvalue square root otherwise (covers the zero and singular cases).
inline Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov) {
  if (cov.size() == 0 || cov.isZero(0.0)) return Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.eigenvalues().minCoeff() < -1e-10 * es.eigenvalues().cwiseAbs().maxCoeff())
    throw StructuralError("simulate: noise covariance is not positive semidefinite");
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
}

// One running difference equation y = (num/den) u. output() evaluates y(t)
// from the history plus the current input; advance() commits (u(t), y(t))
// once the network loop has settled the sample.
class FilterState {
 public:
  explicit FilterState(const RationalTf& tf) : tf_(&tf) {
    require_monic_den(tf, "simulate");
    u_.assign(static_cast<std::size_t>(tf.num.degree()), 0.0);
    y_.assign(static_cast<std::size_t>(tf.den.degree()), 0.0);
  }

  double output(double u_now) const {
    double acc = tf_->num.at(0) * u_now;
    for (std::size_t k = 0; k < u_.size(); ++k) acc += tf_->num.coeffs[k + 1] * u_[k];
    for (std::size_t k = 0; k < y_.size(); ++k) acc -= tf_->den.coeffs[k + 1] * y_[k];
    return acc;
  }

  void advance(double u_now, double y_now) {
    push(u_, u_now);
    push(y_, y_now);
  }

 private:
  static void push(std::vector<double>& buf, double v) {
    if (buf.empty()) return;
    for (std::size_t i = buf.size(); i-- > 1;) buf[i] = buf[i - 1];
    buf[0] = v;
  }
  const RationalTf* tf_;
  std::vector<double> u_;  // u(t-1), u(t-2), ...
  std::vector<double> y_;  // y(t-1), y(t-2), ...
};

}  // namespace detail

/// Draws N rows of zero-mean Gaussian noise with the given covariance.
inline Eigen::MatrixXd draw_noise(const Eigen::MatrixXd& cov, long N, std::uint64_t seed) {
  const Eigen::MatrixXd factor = detail::covariance_factor(cov);
  const int p = static_cast<int>(cov.rows());
  GaussianStream gauss(seed);
  Eigen::MatrixXd e(N, p);
  Eigen::VectorXd z(p);
  for (long t = 0; t < N; ++t) {
    for (int i = 0; i < p; ++i) z(i) = gauss.next();
    e.row(t) = (factor * z).transpose();
  }
  return e;
}

/// Simulates the closed loop driven by the supplied excitation r (one row per
/// sample, burn_in extra rows at the front) and freshly drawn noise. The
/// returned dataset keeps the last r.rows() - burn_in samples and stores the
/// noise realization as ground truth.
inline Dataset simulate(const NetworkModel& model, const Eigen::MatrixXd& r, std::uint64_t seed,
                        int burn_in = kDefaultBurnIn) {
  validate(model);
  if (r.cols() != model.K) throw StructuralError("simulate: r has wrong number of columns");
  const long total = r.rows();
  if (total <= burn_in) throw StructuralError("simulate: r shorter than burn-in");

  const Eigen::MatrixXd e = draw_noise(model.lambda, total, seed);

  enum Kind { kG, kR, kH };
  struct Module {
    int target;
    int source;
    Kind kind;
    detail::FilterState state;
    double y_now = 0.0;
  };
  std::vector<Module> modules;
  for (int j = 0; j < model.L; ++j) {
    for (int l = 0; l < model.L; ++l)
      if (model.G.present(j, l)) modules.push_back({j, l, kG, detail::FilterState(model.G.at(j, l))});
    for (int k = 0; k < model.K; ++k)
      if (model.R.present(j, k)) modules.push_back({j, k, kR, detail::FilterState(model.R.at(j, k))});
    for (int s = 0; s < model.p; ++s)
      if (model.H.present(j, s)) modules.push_back({j, s, kH, detail::FilterState(model.H.at(j, s))});
  }

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(total, model.L);
  for (long t = 0; t < total; ++t) {
    // G outputs depend on past samples only (zero feedthrough), so the
    // current w enters nowhere in this pass.
    for (Module& m : modules) {
      const double u_now = (m.kind == kR) ? r(t, m.source) : (m.kind == kH) ? e(t, m.source) : 0.0;
      m.y_now = m.state.output(u_now);
      w(t, m.target) += m.y_now;
    }
    for (int j = 0; j < model.L; ++j)
      if (!(std::abs(w(t, j)) <= kDivergenceGuard))
        throw NumericalError("simulate: diverged at sample " + std::to_string(t) + ", node " + std::to_string(j + 1));
    // Commit histories with the settled sample.
    for (Module& m : modules) {
      const double u_now = (m.kind == kG) ? w(t, m.source) : (m.kind == kR) ? r(t, m.source) : e(t, m.source);
      m.state.advance(u_now, m.y_now);
    }
  }

  Dataset out;
  out.w = w.bottomRows(total - burn_in);
  out.r = r.bottomRows(total - burn_in);
  out.e_true = e.bottomRows(total - burn_in);
  out.node_order.resize(static_cast<std::size_t>(model.L));
  for (int j = 0; j < model.L; ++j) out.node_order[static_cast<std::size_t>(j)] = j;
  return out;
}

/// White Gaussian excitation, one stream shared across columns.
inline Eigen::MatrixXd white_excitation(int K, long rows, double variance, std::uint64_t seed) {
  Eigen::MatrixXd cov = variance * Eigen::MatrixXd::Identity(K, K);
  return draw_noise(cov, rows, seed);
}

}  // namespace netid
