#include <catch2/catch_amalgamated.hpp>

#include "netid/io.hpp"
#include "netid/simulate.hpp"

namespace {

netid::NetworkModel benchmark_model() { return netid::read_network_file(std::string(NETID_DATA_DIR) + "/appendixE.net"); }

netid::NetworkModel passthrough_model(int L) {
  netid::NetworkModel m;
  m.L = L;
  m.K = L;
  m.p = L;
  m.G = netid::TfMatrix(L, L);
  m.H = netid::TfMatrix(L, L);
  m.R = netid::TfMatrix(L, L);
  m.lambda = Eigen::MatrixXd::Zero(L, L);
  for (int j = 0; j < L; ++j) {
    m.H.set(j, j, netid::tf_one());
    m.R.set(j, j, netid::tf_one());
  }
  return m;
}

}  // namespace

TEST_CASE("noise-free passthrough reproduces the excitation") {
  const netid::NetworkModel model = passthrough_model(3);
  const Eigen::MatrixXd r = netid::white_excitation(3, 120, 2.0, 99);
  const netid::Dataset data = netid::simulate(model, r, 1, 20);
  CHECK(data.N() == 100);
  CHECK(data.w.isApprox(data.r, 1e-15));
}

TEST_CASE("identical seeds give identical records") {
  const netid::NetworkModel model = benchmark_model();
  const Eigen::MatrixXd r = netid::white_excitation(6, 300, 5.0, 4);
  const netid::Dataset a = netid::simulate(model, r, 42, 50);
  const netid::Dataset b = netid::simulate(model, r, 42, 50);
  CHECK(a.w == b.w);
  CHECK(*a.e_true == *b.e_true);
  const netid::Dataset c = netid::simulate(model, r, 43, 50);
  CHECK(a.w != c.w);
}

TEST_CASE("zero noise and zero excitation give the zero record") {
  netid::NetworkModel model = benchmark_model();
  model.lambda.setZero();
  const Eigen::MatrixXd r = Eigen::MatrixXd::Zero(200, 6);
  const netid::Dataset data = netid::simulate(model, r, 5, 0);
  CHECK(data.w.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("sample-wise loop closure against direct filtering") {
  const netid::NetworkModel model = benchmark_model();
  const Eigen::MatrixXd r = netid::white_excitation(6, 400, 5.0, 17);
  const netid::Dataset data = netid::simulate(model, r, 23, 0);  // zero burn-in keeps initial states aligned

  auto col = [](const Eigen::MatrixXd& m, int j) {
    return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
  };
  for (int j = 0; j < 6; ++j) {
    Eigen::VectorXd recon = Eigen::VectorXd::Zero(data.N());
    for (int l = 0; l < 6; ++l)
      if (model.G.present(j, l)) {
        const auto y = netid::filter(model.G.at(j, l), col(data.w, l));
        for (long t = 0; t < data.N(); ++t) recon(t) += y[static_cast<std::size_t>(t)];
      }
    for (int k = 0; k < 6; ++k)
      if (model.R.present(j, k)) {
        const auto y = netid::filter(model.R.at(j, k), col(data.r, k));
        for (long t = 0; t < data.N(); ++t) recon(t) += y[static_cast<std::size_t>(t)];
      }
    for (int s = 0; s < 4; ++s)
      if (model.H.present(j, s)) {
        const auto y = netid::filter(model.H.at(j, s), col(*data.e_true, s));
        for (long t = 0; t < data.N(); ++t) recon(t) += y[static_cast<std::size_t>(t)];
      }
    CHECK((recon - data.w.col(j)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("reordered disturbance form filters the reordered innovation to the same signal") {
  const netid::NetworkModel model = benchmark_model();
  const Eigen::MatrixXd e = netid::draw_noise(model.lambda, 300, 7);
  const Eigen::MatrixXd gamma = model.gamma();

  // check-innovation: (e, Gamma e).
  Eigen::MatrixXd e_check(300, 6);
  e_check.leftCols(4) = e;
  e_check.rightCols(2) = e * gamma.transpose();

  const netid::TfMatrix hcheck = netid::build_check_H(model);
  auto col = [](const Eigen::MatrixXd& m, int j) {
    return std::vector<double>(m.col(j).data(), m.col(j).data() + m.rows());
  };
  for (int j = 0; j < 6; ++j) {
    Eigen::VectorXd via_h = Eigen::VectorXd::Zero(300);
    Eigen::VectorXd via_check = Eigen::VectorXd::Zero(300);
    for (int s = 0; s < 4; ++s)
      if (model.H.present(j, s)) {
        const auto y = netid::filter(model.H.at(j, s), col(e, s));
        for (long t = 0; t < 300; ++t) via_h(t) += y[static_cast<std::size_t>(t)];
      }
    for (int s = 0; s < 6; ++s)
      if (hcheck.present(j, s)) {
        const auto y = netid::filter(hcheck.at(j, s), col(e_check, s));
        for (long t = 0; t < 300; ++t) via_check(t) += y[static_cast<std::size_t>(t)];
      }
    CHECK((via_h - via_check).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("divergence guard trips on an unstable loop") {
  netid::NetworkModel model;
  model.L = 2;
  model.K = 1;
  model.p = 1;
  model.G = netid::TfMatrix(2, 2);
  model.H = netid::TfMatrix(2, 1);
  model.R = netid::TfMatrix(2, 1);
  model.lambda = Eigen::MatrixXd::Zero(1, 1);
  model.G.set(0, 1, {netid::Polynomial{0.0, 2.0}, netid::Polynomial{1.0}});
  model.G.set(1, 0, {netid::Polynomial{0.0, 2.0}, netid::Polynomial{1.0}});
  model.H.set(0, 0, netid::tf_one());
  model.R.set(0, 0, netid::tf_one());
  const Eigen::MatrixXd r = Eigen::MatrixXd::Ones(300, 1);
  CHECK_THROWS_AS(netid::simulate(model, r, 1, 0), netid::NumericalError);
}

TEST_CASE("short excitation is rejected") {
  const netid::NetworkModel model = passthrough_model(2);
  const Eigen::MatrixXd r = Eigen::MatrixXd::Zero(10, 2);
  CHECK_THROWS_AS(netid::simulate(model, r, 1, 10), netid::StructuralError);
}
