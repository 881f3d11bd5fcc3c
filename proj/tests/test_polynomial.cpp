#include <catch2/catch_amalgamated.hpp>

#include "netid/polynomial.hpp"
#include "oracles.hpp"

using netid::filter;
using netid::impulse_response;
using netid::Polynomial;
using netid::RationalTf;

TEST_CASE("filter identity and pure delay") {
  const std::vector<double> u{1.0, 2.0, 3.0};
  CHECK(filter(netid::tf_one(), u) == u);
  const std::vector<double> delayed = filter(netid::tf_delay(), u);
  CHECK(delayed == std::vector<double>{0.0, 1.0, 2.0});
}

TEST_CASE("filter matches direct convolution with the truncated impulse response") {
  // The G(1,4) module of the benchmark system.
  RationalTf tf{Polynomial{0.0, 0.38, 0.24}, Polynomial{1.0, -1.35, 0.54}};
  std::vector<double> impulse(50, 0.0);
  impulse[0] = 1.0;
  const std::vector<double> y = filter(tf, impulse);
  const std::vector<double> h = oracles::impulse_response_recursion({0.0, 0.38, 0.24}, {1.0, -1.35, 0.54}, 50);
  const std::vector<double> y_ref = oracles::convolve(h, impulse);
  for (int t = 0; t < 50; ++t) CHECK(y[static_cast<std::size_t>(t)] == Catch::Approx(y_ref[static_cast<std::size_t>(t)]).margin(1e-12));

  // And on a non-trivial input.
  oracles::TestRng rng(7);
  std::vector<double> u(50);
  for (auto& v : u) v = rng.uniform();
  const std::vector<double> yu = filter(tf, u);
  const std::vector<double> yu_ref = oracles::convolve(h, u);
  for (int t = 0; t < 50; ++t) CHECK(yu[static_cast<std::size_t>(t)] == Catch::Approx(yu_ref[static_cast<std::size_t>(t)]).margin(1e-10));
}

TEST_CASE("impulse response by long division") {
  SECTION("geometric series") {
    const double a = 0.3;
    const Polynomial h = impulse_response({Polynomial{1.0}, Polynomial{1.0, -a}}, 4);
    CHECK(h.coeffs == std::vector<double>{1.0, a, a * a, a * a * a});
  }
  SECTION("strictly proper first-order module") {
    // H(3,2) of the benchmark system: -0.56 q^-1 / (1 - 0.40 q^-1).
    const Polynomial h = impulse_response({Polynomial{0.0, -0.56}, Polynomial{1.0, -0.40}}, 3);
    CHECK(h.at(0) == 0.0);
    CHECK(h.at(1) == Catch::Approx(-0.56).margin(1e-15));
    CHECK(h.at(2) == Catch::Approx(-0.224).margin(1e-15));
  }
  SECTION("strictly proper numerators always start at zero") {
    oracles::TestRng rng(3);
    for (int rep = 0; rep < 10; ++rep) {
      RationalTf tf{Polynomial{0.0, rng.uniform(), rng.uniform()}, Polynomial{1.0, rng.uniform(0.0, 0.5)}};
      CHECK(impulse_response(tf, 5).at(0) == 0.0);
    }
  }
}

TEST_CASE("filtering is linear") {
  oracles::TestRng rng(11);
  RationalTf tf{Polynomial{0.5, -0.2, 0.1}, Polynomial{1.0, -0.7, 0.12}};
  std::vector<double> u(64), v(64), mix(64);
  const double alpha = 1.7, beta = -0.3;
  for (std::size_t t = 0; t < u.size(); ++t) {
    u[t] = rng.uniform();
    v[t] = rng.uniform();
    mix[t] = alpha * u[t] + beta * v[t];
  }
  const auto yu = filter(tf, u);
  const auto yv = filter(tf, v);
  const auto ym = filter(tf, mix);
  for (std::size_t t = 0; t < u.size(); ++t)
    CHECK(ym[t] == Catch::Approx(alpha * yu[t] + beta * yv[t]).margin(1e-12));
}

TEST_CASE("filter of an impulse equals the impulse response prefix") {
  RationalTf tf{Polynomial{0.2, 0.4}, Polynomial{1.0, -0.9, 0.5, -0.1}};
  std::vector<double> impulse(32, 0.0);
  impulse[0] = 1.0;
  const auto y = filter(tf, impulse);
  for (int n : {1, 2, 7, 32}) {
    const Polynomial h = impulse_response(tf, n);
    for (int k = 0; k < n; ++k) CHECK(y[static_cast<std::size_t>(k)] == Catch::Approx(h.at(k)).margin(1e-13));
  }
}

TEST_CASE("structural guards") {
  RationalTf bad{Polynomial{1.0}, Polynomial{2.0, 1.0}};
  CHECK_THROWS_AS(filter(bad, {1.0}), netid::StructuralError);
  CHECK_THROWS_AS(impulse_response(bad, 3), netid::StructuralError);
  CHECK_THROWS_AS(filter(netid::tf_one(), {}), netid::StructuralError);
  CHECK_THROWS_AS(impulse_response(netid::tf_one(), 0), netid::StructuralError);
}

TEST_CASE("pole stability check") {
  CHECK(netid::stable({Polynomial{1.0}, Polynomial{1.0, -0.5}}));
  CHECK_FALSE(netid::stable({Polynomial{1.0}, Polynomial{1.0, -1.5}}));
  CHECK(netid::stable({Polynomial{0.0, 0.38, 0.24}, Polynomial{1.0, -1.35, 0.54}}));
  CHECK(netid::stable({Polynomial{1.0}, Polynomial{1.0}}));  // static gain
}
