#include <doctest.h>

#include "mflq/verify.hpp"
#include "oracles.hpp"

using namespace mflq;

namespace {

QuadraticValue scalar_qv() {
  const LQModel m =
      LQModel::scalar(0.3, 0.2, 1.0, 0.2, 0.1, 0.3, 1.0, 0.5, 1.0, 1.0, 0.5, 0.25, 1.0);
  return QuadraticValue(m, solve_riccati(m, 800));
}

CheckSizes small_sizes() {
  CheckSizes s;
  s.particles = 200;
  s.paths = 60;
  s.sde_steps = 100;
  return s;
}

}  // namespace

TEST_CASE("check report pass logic") {
  CheckReport r;
  r.statistic = 0.5;
  r.tolerance = 1.0;
  r.finalize();
  CHECK(r.pass);
  r.statistic = -1.5;
  r.finalize();
  CHECK_FALSE(r.pass);
  r.one_sided = true;
  r.statistic = 5.0;
  r.tolerance = 0.0;
  r.finalize();
  CHECK(r.pass);
  r.statistic = -0.1;
  r.finalize();
  CHECK_FALSE(r.pass);
}

TEST_CASE("value and simulated cost agree at moderate sizes") {
  const QuadraticValue qv = scalar_qv();
  const Eigen::MatrixXd init = gaussian_cloud(
      Eigen::VectorXd::Constant(1, 0.5), Eigen::MatrixXd::Identity(1, 1), 400, 5);
  CheckSizes s = small_sizes();
  const CheckReport rep = value_cost_check(qv, init, s, 1234);
  INFO(rep.details);
  CHECK(rep.pass);
  CHECK(rep.stderr_ > 0.0);

  // Determinism in the seed.
  const CheckReport again = value_cost_check(qv, init, s, 1234);
  CHECK(rep.statistic == again.statistic);
}

TEST_CASE("dpp residual check passes and rejects bad intervals") {
  const QuadraticValue qv = scalar_qv();
  const Eigen::MatrixXd init = gaussian_cloud(
      Eigen::VectorXd::Constant(1, 0.5), Eigen::MatrixXd::Identity(1, 1), 300, 6);
  CheckSizes s = small_sizes();
  s.paths = 120;
  const CheckReport rep = dpp_residual_check(qv, 0.0, 0.25, init, s, 77);
  INFO(rep.details);
  CHECK(rep.pass);
  CHECK_THROWS_AS(dpp_residual_check(qv, 0.9, 0.5, init, s, 77),
                  std::invalid_argument);
  CHECK_THROWS_AS(dpp_residual_check(qv, 0.0, -0.1, init, s, 77),
                  std::invalid_argument);
}

TEST_CASE("law invariance: same-law clouds and exact permutation") {
  const QuadraticValue qv = scalar_qv();
  const Eigen::VectorXd mean = Eigen::VectorXd::Constant(1, 0.5);
  const Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(1, 1);
  const Eigen::MatrixXd a = gaussian_cloud(mean, cov, 400, 11);
  const Eigen::MatrixXd b = gaussian_cloud(mean, cov, 400, 12);
  const CheckReport rep = law_invariance_check(qv, a, b, small_sizes(), 13);
  INFO(rep.details);
  CHECK(rep.pass);
}

TEST_CASE("law invariance flags clouds with different laws") {
  const QuadraticValue qv = scalar_qv();
  const Eigen::MatrixXd a = gaussian_cloud(
      Eigen::VectorXd::Constant(1, 0.5), Eigen::MatrixXd::Identity(1, 1), 400, 14);
  const Eigen::MatrixXd b = gaussian_cloud(
      Eigen::VectorXd::Constant(1, 3.5), Eigen::MatrixXd::Identity(1, 1), 400, 15);
  const CheckReport rep = law_invariance_check(qv, a, b, small_sizes(), 16);
  INFO(rep.details);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("optimality gap: perturbed feedback never beats the synthesized one") {
  const QuadraticValue qv = scalar_qv();
  const Eigen::MatrixXd init = gaussian_cloud(
      Eigen::VectorXd::Constant(1, 0.5), Eigen::MatrixXd::Identity(1, 1), 200, 21);
  CheckSizes s = small_sizes();
  s.paths = 40;
  const CheckReport rep = optimality_gap_check(qv, init, 3, {0.1, 0.2, 0.4}, s, 22);
  INFO(rep.details);
  CHECK(rep.pass);
  CHECK(rep.one_sided);
}

TEST_CASE("comparison principle holds across randomized ordered pairs") {
  const CheckReport rep = comparison_check(25, 600, 15, 31);
  INFO(rep.details);
  CHECK(rep.pass);
  CHECK(rep.statistic == 0.0);
}

TEST_CASE("stability suite passes on the default scalar model") {
  const QuadraticValue qv = scalar_qv();
  const Eigen::MatrixXd init = gaussian_cloud(
      Eigen::VectorXd::Constant(1, 0.5), Eigen::MatrixXd::Identity(1, 1), 200, 41);
  CheckSizes s = small_sizes();
  const std::vector<CheckReport> reps = stability_checks(qv, init, s, 42);
  REQUIRE(reps.size() == 3);
  for (const auto& rep : reps) {
    INFO(rep.name << ": " << rep.details);
    CHECK(rep.pass);
  }
  CHECK(reps[0].name == "stability_forward_w2");
  CHECK(reps[1].name == "stability_bsde");
  CHECK(reps[2].name == "stability_value_time");
}

TEST_CASE("monte-carlo scaling of the initial backward value") {
  const CheckReport rep =
      y0_determinism_check(0.3, 1.0, {500, 2000, 8000}, 200, 51);
  INFO(rep.details);
  CHECK(rep.pass);
}
