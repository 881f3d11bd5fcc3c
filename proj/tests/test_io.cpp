#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "netid/io.hpp"
#include "netid/simulate.hpp"

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("network file round trip") {
  const netid::NetworkModel model = netid::read_network_file(std::string(NETID_DATA_DIR) + "/appendixE.net");
  const std::string path = temp_path("netid_roundtrip.net");
  netid::write_network_file(model, path);
  const netid::NetworkModel again = netid::read_network_file(path);
  CHECK(again.L == model.L);
  CHECK(again.K == model.K);
  CHECK(again.p == model.p);
  CHECK(again.lambda.isApprox(model.lambda, 0.0));
  for (int j = 0; j < model.L; ++j)
    for (int l = 0; l < model.L; ++l) {
      REQUIRE(again.G.present(j, l) == model.G.present(j, l));
      if (model.G.present(j, l)) {
        CHECK(again.G.at(j, l).num.coeffs == model.G.at(j, l).num.coeffs);
        CHECK(again.G.at(j, l).den.coeffs == model.G.at(j, l).den.coeffs);
      }
    }
  std::remove(path.c_str());
}

TEST_CASE("network file parse errors carry the location") {
  const std::string path = temp_path("netid_bad.net");
  SECTION("missing version line") {
    std::ofstream(path) << "network\nL = 2\n";
    CHECK_THROWS_AS(netid::read_network_file(path), netid::ParseError);
  }
  SECTION("bad coefficient") {
    std::ofstream(path) << "# netid-format v1\nnetwork\nL = 2\nK = 0\np = 2\nLambda = diag 1 1\n"
                        << "H[1][1] = 1 oops / 1\n";
    try {
      netid::read_network_file(path);
      FAIL("expected ParseError");
    } catch (const netid::ParseError& err) {
      CHECK(err.line() == 7);
      CHECK(std::string(err.what()).find("oops") != std::string::npos);
    }
  }
  SECTION("self-loop is caught by validation") {
    std::ofstream(path) << "# netid-format v1\nnetwork\nL = 2\nK = 0\np = 2\nLambda = diag 1 1\n"
                        << "G[1][1] = 0 0.5 / 1\n";
    CHECK_THROWS_AS(netid::read_network_file(path), netid::ParseError);
  }
  std::remove(path.c_str());
}

TEST_CASE("dataset CSV round trip preserves every sample bit-exactly") {
  const netid::NetworkModel model = netid::read_network_file(std::string(NETID_DATA_DIR) + "/appendixE.net");
  const Eigen::MatrixXd r = netid::white_excitation(6, 80, 5.0, 3);
  const netid::Dataset data = netid::simulate(model, r, 9, 30);
  const std::string path = temp_path("netid_roundtrip.csv");
  netid::write_dataset_csv(data, path, true);
  const netid::Dataset again = netid::read_dataset_csv(path);
  CHECK(again.N() == data.N());
  CHECK(again.L() == 6);
  CHECK(again.K() == 6);
  REQUIRE(again.e_true.has_value());
  CHECK(again.w == data.w);
  CHECK(again.r == data.r);
  CHECK(*again.e_true == *data.e_true);
  std::remove(path.c_str());
}

TEST_CASE("dataset CSV without noise columns") {
  netid::Dataset data;
  data.w = Eigen::MatrixXd::Random(5, 2);
  data.r = Eigen::MatrixXd::Random(5, 1);
  data.node_order = {0, 1};
  const std::string path = temp_path("netid_nonoise.csv");
  netid::write_dataset_csv(data, path, false);
  const netid::Dataset again = netid::read_dataset_csv(path);
  CHECK_FALSE(again.e_true.has_value());
  CHECK(again.w == data.w);
  std::remove(path.c_str());
}

TEST_CASE("Lambda accepts full symmetric rows") {
  const std::string path = temp_path("netid_fulllambda.net");
  std::ofstream(path) << "# netid-format v1\nnetwork\nL = 2\nK = 0\np = 2\n"
                      << "Lambda = 2 0.5 ; 0.5 1\n"
                      << "H[1][1] = 1 / 1\nH[2][2] = 1 / 1\n";
  const netid::NetworkModel model = netid::read_network_file(path);
  CHECK(model.lambda(0, 1) == 0.5);
  CHECK(model.lambda(1, 1) == 1.0);
  std::remove(path.c_str());
}
