#pragma once

// Polynomial and rational-filter algebra in the unit delay q^-1.
// Coefficient lists are ascending in powers of q^-1 throughout the
// library: {c0, c1, ..., cm} represents c0 + c1 q^-1 + ... + cm q^-m.

#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <vector>

#include "netid/errors.hpp"

namespace netid {

struct Polynomial {
  std::vector<double> coeffs{0.0};

  Polynomial() = default;
  Polynomial(std::initializer_list<double> c) : coeffs(c) {
    if (coeffs.empty()) coeffs = {0.0};
  }
  explicit Polynomial(std::vector<double> c) : coeffs(std::move(c)) {
    if (coeffs.empty()) coeffs = {0.0};
  }

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }

  /// Coefficient of q^-k; zero past the stored degree.
  double at(int k) const {
    return (k >= 0 && k <= degree()) ? coeffs[static_cast<std::size_t>(k)] : 0.0;
  }

  bool monic() const { return coeffs[0] == 1.0; }
  bool strictly_proper_as_numerator() const { return coeffs[0] == 0.0; }

  bool is_zero() const {
    for (double c : coeffs)
      if (c != 0.0) return false;
    return true;
  }
};

struct RationalTf {
  Polynomial num{{0.0}};
  Polynomial den{{1.0}};

  double feedthrough() const { return num.at(0) / den.at(0); }
};

inline RationalTf tf_zero() { return {}; }
inline RationalTf tf_one() { return {Polynomial{1.0}, Polynomial{1.0}}; }
inline RationalTf tf_delay() { return {Polynomial{0.0, 1.0}, Polynomial{1.0}}; }

/// f - c, sharing f's denominator.
inline RationalTf sub_const(const RationalTf& f, double c) {
  RationalTf out = f;
  int deg = std::max(f.num.degree(), f.den.degree());
  out.num.coeffs.resize(static_cast<std::size_t>(deg) + 1, 0.0);
  for (int k = 0; k <= deg; ++k) out.num.coeffs[static_cast<std::size_t>(k)] = f.num.at(k) - c * f.den.at(k);
  return out;
}

inline void require_monic_den(const RationalTf& tf, const char* where) {
  if (tf.den.at(0) != 1.0)
    throw StructuralError(std::string(where) + ": denominator must be monic");
}

/// Causal difference equation with zero initial conditions.
/// y(t) = sum_k num_k u(t-k) - sum_{k>=1} den_k y(t-k), |y| = |u|.
inline std::vector<double> filter(const RationalTf& tf, const std::vector<double>& u) {
  require_monic_den(tf, "filter");
  if (u.empty()) throw StructuralError("filter: empty input series");
  const int mb = tf.num.degree();
  const int ma = tf.den.degree();
  std::vector<double> y(u.size(), 0.0);
  for (std::size_t t = 0; t < u.size(); ++t) {
    double acc = 0.0;
    for (int k = 0; k <= mb; ++k)
      if (t >= static_cast<std::size_t>(k)) acc += tf.num.coeffs[static_cast<std::size_t>(k)] * u[t - static_cast<std::size_t>(k)];
    for (int k = 1; k <= ma; ++k)
      if (t >= static_cast<std::size_t>(k)) acc -= tf.den.coeffs[static_cast<std::size_t>(k)] * y[t - static_cast<std::size_t>(k)];
    y[t] = acc;
  }
  return y;
}

/// First n power-series coefficients of tf in q^-1, by long division.
inline Polynomial impulse_response(const RationalTf& tf, int n) {
  require_monic_den(tf, "impulse_response");
  if (n < 1) throw StructuralError("impulse_response: n must be >= 1");
  const int ma = tf.den.degree();
  std::vector<double> h(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    double acc = tf.num.at(k);
    for (int i = 1; i <= std::min(k, ma); ++i)
      acc -= tf.den.coeffs[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(k - i)];
    h[static_cast<std::size_t>(k)] = acc;
  }
  return Polynomial(std::move(h));
}

/// All poles strictly inside the unit circle. Poles are the roots of
/// z^m + d1 z^{m-1} + ... + dm given den = 1 + d1 q^-1 + ... + dm q^-m.
inline bool stable(const RationalTf& tf) {
  require_monic_den(tf, "stable");
  int m = tf.den.degree();
  while (m > 0 && tf.den.at(m) == 0.0) --m;
  if (m == 0) return true;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) companion(0, i) = -tf.den.at(i + 1);
  for (int i = 1; i < m; ++i) companion(i, i - 1) = 1.0;
  Eigen::VectorXcd roots = companion.eigenvalues();
  for (int i = 0; i < m; ++i)
    if (std::abs(roots(i)) >= 1.0) return false;
  return true;
}

}  // namespace netid
