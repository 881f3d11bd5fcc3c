#include <Eigen/Eigenvalues>
#include <catch2/catch_amalgamated.hpp>

#include "netid/io.hpp"
#include "netid/network.hpp"

namespace {

netid::NetworkModel benchmark_model() { return netid::read_network_file(std::string(NETID_DATA_DIR) + "/appendixE.net"); }

}  // namespace

TEST_CASE("benchmark fixture loads and validates") {
  const netid::NetworkModel model = benchmark_model();
  CHECK(model.L == 6);
  CHECK(model.K == 6);
  CHECK(model.p == 4);
  CHECK(model.G.present(0, 3));
  CHECK_FALSE(model.G.present(0, 0));
  CHECK(model.lambda(3, 3) == 0.4);

  Eigen::MatrixXd gamma = model.gamma();
  Eigen::MatrixXd expected(2, 4);
  expected << 0, 0, 1, 0, 0, 1, 0, 0;
  CHECK(gamma.isApprox(expected, 1e-14));
}

TEST_CASE("square monic disturbance form") {
  const netid::NetworkModel model = benchmark_model();
  const netid::TfMatrix hcheck = netid::build_check_H(model);

  SECTION("feedthrough is the identity") {
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const double want = (i == j) ? 1.0 : 0.0;
        const double got = hcheck.present(i, j) ? hcheck.at(i, j).feedthrough() : 0.0;
        CHECK(got == Catch::Approx(want).margin(1e-14));
      }
  }

  SECTION("last columns are [0; I]") {
    for (int j = 0; j < 6; ++j)
      for (int s = 4; s < 6; ++s) {
        if (j == s) {
          REQUIRE(hcheck.present(j, s));
          CHECK(hcheck.at(j, s).num.coeffs == std::vector<double>{1.0});
          CHECK(hcheck.at(j, s).den.coeffs == std::vector<double>{1.0});
        } else {
          CHECK_FALSE(hcheck.present(j, s));
        }
      }
  }

  SECTION("lower-left block subtracts the feedthrough") {
    // Row 5: (0, H52, H53 - 1, 0). The nonzero remainder of H53 - 1 is
    // (1 + 0.66 q^-1) - (1 + 0.51 q^-1) = 0.15 q^-1 over the same monic den.
    CHECK_FALSE(hcheck.present(4, 0));
    CHECK_FALSE(hcheck.present(4, 3));
    REQUIRE(hcheck.present(4, 1));
    CHECK(hcheck.at(4, 1).num.at(1) == Catch::Approx(0.49));
    REQUIRE(hcheck.present(4, 2));
    CHECK(hcheck.at(4, 2).num.at(0) == Catch::Approx(0.0).margin(1e-15));
    CHECK(hcheck.at(4, 2).num.at(1) == Catch::Approx(0.15).margin(1e-12));
    // Row 6: (0, H62 - 1, 0, H64), with H62 - 1 = -0.29 q^-1 / (1 + 0.53 q^-1).
    CHECK_FALSE(hcheck.present(5, 0));
    CHECK_FALSE(hcheck.present(5, 2));
    REQUIRE(hcheck.present(5, 1));
    CHECK(hcheck.at(5, 1).num.at(1) == Catch::Approx(0.24 - 0.53).margin(1e-12));
    REQUIRE(hcheck.present(5, 3));
    CHECK(hcheck.at(5, 3).num.at(1) == Catch::Approx(-0.56));
  }

  SECTION("full-rank model passes through unchanged") {
    netid::NetworkModel full;
    full.L = 2;
    full.K = 0;
    full.p = 2;
    full.G = netid::TfMatrix(2, 2);
    full.H = netid::TfMatrix(2, 2);
    full.R = netid::TfMatrix(2, 0);
    full.lambda = Eigen::Matrix2d::Identity();
    full.H.set(0, 0, {netid::Polynomial{1.0, 0.3}, netid::Polynomial{1.0, 0.1}});
    full.H.set(1, 1, {netid::Polynomial{1.0, -0.2}, netid::Polynomial{1.0}});
    const netid::TfMatrix out = netid::build_check_H(full);
    CHECK(out.at(0, 0).num.coeffs == full.H.at(0, 0).num.coeffs);
    CHECK(out.at(1, 1).num.coeffs == full.H.at(1, 1).num.coeffs);
    CHECK_FALSE(out.present(0, 1));
  }

  SECTION("non-monic top block is rejected") {
    netid::NetworkModel bad = benchmark_model();
    bad.H.set(0, 0, {netid::Polynomial{0.9, 0.52}, netid::Polynomial{1.0, 0.41}});
    CHECK_THROWS_AS(netid::build_check_H(bad), netid::StructuralError);
  }
}

TEST_CASE("reordered noise covariance") {
  const netid::NetworkModel model = benchmark_model();
  const Eigen::MatrixXd lam = netid::check_lambda(model);
  CHECK(lam.rows() == 6);
  CHECK(lam.isApprox(lam.transpose(), 1e-14));
  CHECK(lam(4, 4) == Catch::Approx(0.3));
  CHECK(lam(5, 5) == Catch::Approx(0.2));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lam);
  CHECK(es.eigenvalues().minCoeff() > -1e-14);
  int rank = 0;
  for (int i = 0; i < 6; ++i)
    if (es.eigenvalues()(i) > 1e-12) ++rank;
  CHECK(rank == 4);

  // The nonzero spectrum is the spectrum of Lambda * (I + Gamma^T Gamma).
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(lam);
  CHECK(svd.singularValues()(0) == Catch::Approx(0.6).margin(1e-12));
  CHECK(svd.singularValues()(1) == Catch::Approx(0.4).margin(1e-12));
  CHECK(svd.singularValues()(2) == Catch::Approx(0.4).margin(1e-12));
  CHECK(svd.singularValues()(3) == Catch::Approx(0.1).margin(1e-12));

  SECTION("full-rank case returns Lambda itself") {
    netid::NetworkModel full;
    full.L = 2;
    full.K = 0;
    full.p = 2;
    full.G = netid::TfMatrix(2, 2);
    full.H = netid::TfMatrix(2, 2);
    full.R = netid::TfMatrix(2, 0);
    full.lambda = (Eigen::Matrix2d() << 2.0, 0.5, 0.5, 1.0).finished();
    CHECK(netid::check_lambda(full).isApprox(full.lambda, 1e-14));
  }
}

TEST_CASE("model validation rejects malformed structures") {
  netid::NetworkModel model = benchmark_model();
  SECTION("self-loop") {
    model.G.set(2, 2, {netid::Polynomial{0.0, 0.1}, netid::Polynomial{1.0}});
    CHECK_THROWS_AS(netid::validate(model), netid::StructuralError);
  }
  SECTION("non-strictly-proper module") {
    model.G.set(0, 1, {netid::Polynomial{0.5, 0.1}, netid::Polynomial{1.0}});
    CHECK_THROWS_AS(netid::validate(model), netid::StructuralError);
  }
  SECTION("asymmetric covariance") {
    model.lambda(0, 1) = 0.3;
    CHECK_THROWS_AS(netid::validate(model), netid::StructuralError);
  }
}

TEST_CASE("node permutation bookkeeping") {
  const netid::NetworkModel model = benchmark_model();
  const std::vector<int> perm{3, 1, 0, 2, 5, 4};
  const netid::NetworkModel pm = netid::permute_nodes(model, perm);
  // Old G(1,4) edge: node 0 <- node 3; new positions 2 <- 0.
  CHECK(pm.G.present(2, 0));
  CHECK(pm.G.at(2, 0).num.at(1) == Catch::Approx(0.38));
  // H columns stay put: old row 3 (H42, H44) lands at new row 0.
  CHECK(pm.H.present(0, 1));
  CHECK(pm.H.present(0, 3));

  netid::Dataset data;
  data.w.resize(3, 6);
  for (int t = 0; t < 3; ++t)
    for (int j = 0; j < 6; ++j) data.w(t, j) = 10.0 * t + j;
  data.r.resize(3, 0);
  data.node_order = {0, 1, 2, 3, 4, 5};
  const netid::Dataset pd = netid::permute_nodes(data, perm);
  CHECK(pd.w(1, 0) == 13.0);
  CHECK(pd.node_order == perm);
}
