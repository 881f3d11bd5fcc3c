#pragma once

// Independent reference implementations used only by the tests. These stay
// deliberately naive (direct convolutions, stacked regressions, exhaustive
// searches) so they share no code path with the library.

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <vector>

#include "netid/network.hpp"
#include "netid/rng.hpp"

namespace oracles {

/// Truncated impulse response of num/den by running the recursion
/// h_k = num_k - sum_i den_i h_{k-i}, coded apart from the library's
/// long division.
inline std::vector<double> impulse_response_recursion(const std::vector<double>& num,
                                                      const std::vector<double>& den, int n) {
  std::vector<double> h(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    double acc = (k < static_cast<int>(num.size())) ? num[static_cast<std::size_t>(k)] : 0.0;
    for (int i = 1; i < static_cast<int>(den.size()) && i <= k; ++i)
      acc -= den[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(k - i)];
    h[static_cast<std::size_t>(k)] = acc;
  }
  return h;
}

/// Direct convolution y(t) = sum_k h_k u(t-k) with a truncated kernel.
inline std::vector<double> convolve(const std::vector<double>& h, const std::vector<double>& u) {
  std::vector<double> y(u.size(), 0.0);
  for (std::size_t t = 0; t < u.size(); ++t)
    for (std::size_t k = 0; k < h.size() && k <= t; ++k) y[t] += h[k] * u[t - k];
  return y;
}

/// Plain polynomial product in ascending coefficients.
inline std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> c(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
  return c;
}

/// Dense least squares through Eigen's QR, for cross-checking the library's
/// normal-equation path on materialized designs.
inline Eigen::VectorXd dense_least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y) {
  return a.colPivHouseholderQr().solve(y);
}

/// Exhaustive vertex-disjoint path count: enumerates all simple paths from
/// any source to any sink and branches over compatible path sets.
class DisjointPathsBruteForce {
 public:
  DisjointPathsBruteForce(int n_vertices, const std::vector<std::pair<int, int>>& edges,
                          const std::vector<int>& sources, const std::vector<int>& sinks)
      : n_(n_vertices), adj_(static_cast<std::size_t>(n_vertices)) {
    for (auto [a, b] : edges) adj_[static_cast<std::size_t>(a)].push_back(b);
    std::vector<bool> is_sink(static_cast<std::size_t>(n_), false);
    for (int t : sinks) is_sink[static_cast<std::size_t>(t)] = true;
    for (int s : sources) {
      std::vector<int> path{s};
      std::uint64_t mask = 1ull << s;
      collect(s, mask, path, is_sink);
    }
  }

  int max_disjoint() const {
    int best = 0;
    branch(0, 0ull, 0, best);
    return best;
  }

 private:
  void collect(int v, std::uint64_t mask, std::vector<int>& path, const std::vector<bool>& is_sink) {
    if (is_sink[static_cast<std::size_t>(v)]) path_masks_.push_back(mask);
    for (int to : adj_[static_cast<std::size_t>(v)]) {
      if (mask & (1ull << to)) continue;
      path.push_back(to);
      collect(to, mask | (1ull << to), path, is_sink);
      path.pop_back();
    }
  }

  void branch(std::size_t idx, std::uint64_t used, int count, int& best) const {
    best = std::max(best, count);
    if (idx >= path_masks_.size()) return;
    if (count + static_cast<int>(path_masks_.size() - idx) <= best) return;
    branch(idx + 1, used, count, best);
    if (!(path_masks_[idx] & used)) branch(idx + 1, used | path_masks_[idx], count + 1, best);
  }

  int n_;
  std::vector<std::vector<int>> adj_;
  std::vector<std::uint64_t> path_masks_;
};

/// Uniform pseudo-random doubles for test data, seeded and self-contained.
class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : state_(seed) {}
  double uniform(double lo = -1.0, double hi = 1.0) {
    state_ = netid::splitmix64(state_);
    const double u = static_cast<double>(state_ >> 11) * 0x1p-53;
    return lo + (hi - lo) * u;
  }
  int uniform_int(int lo, int hi) {  // inclusive
    state_ = netid::splitmix64(state_);
    return lo + static_cast<int>(state_ % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t state_;
};

}  // namespace oracles
