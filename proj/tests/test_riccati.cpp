#include <doctest.h>

#include "mflq/riccati.hpp"
#include "oracles.hpp"

using namespace mflq;

TEST_CASE("terminal conditions are hit exactly") {
  const LQModel m = random_psd_model(3, 2, 17);
  const RiccatiSolution sol = solve_riccati(m, 50);
  CHECK(oracles::bitwise_equal(sol.P1_node(sol.nodes() - 1), m.G));
  CHECK(oracles::bitwise_equal(sol.P2_node(sol.nodes() - 1), m.G + m.Gbar));
  CHECK(sol.phi_node(sol.nodes() - 1).norm() == 0.0);
  CHECK(sol.psi_node(sol.nodes() - 1) == 0.0);
  CHECK(sol.horizon() == m.T);
}

TEST_CASE("phi and psi vanish identically (no affine source terms)") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const LQModel m = random_psd_model(2, 2, seed);
    const RiccatiSolution sol = solve_riccati(m, 200);
    for (int i = 0; i < sol.nodes(); ++i) {
      CHECK(sol.phi_node(i).norm() == 0.0);
      CHECK(sol.psi_node(i) == 0.0);
    }
  }
}

TEST_CASE("scalar classical reduction matches the closed form") {
  // Abar = C = Cbar = 0, D = 0, beta = 0, Qbar = Gbar = 0:
  // P1 and P2 both reduce to p' = (b^2/r) p^2 - 2 a p - q, p(T) = g.
  const double a = 0.3, b = 1.2, q = 0.8, r = 0.5, g = 1.1, T = 1.0;
  LQModel m = LQModel::scalar(a, 0, b, 0, 0, 0, q, 0, r, g, 0, 0.0, T);
  const RiccatiSolution sol = solve_riccati(m, 4000);
  for (double t : {0.0, 0.25, 0.5, 0.9}) {
    const double want = oracles::scalar_riccati_closed_form(t, T, a, b, q, r, g);
    CHECK(sol.P1_at(t)(0, 0) == doctest::Approx(want).epsilon(1e-10));
    CHECK(sol.P2_at(t)(0, 0) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("uncontrolled drift-free scalar case integrates exactly") {
  // b = d = 0, a = 0, c = 0: p' = -q, so p(t) = g + q (T - t), linear in t,
  // reproduced exactly by RK4 and by linear interpolation between nodes.
  LQModel m = LQModel::scalar(0, 0, 0, 0, 0, 0, 2.0, 0, 1.0, 0.5, 0, 0.0, 2.0);
  const RiccatiSolution sol = solve_riccati(m, 8);
  for (double t : {0.0, 0.3, 1.0, 1.7}) {
    CHECK(sol.P1_at(t)(0, 0) == doctest::Approx(0.5 + 2.0 * (2.0 - t)).epsilon(1e-14));
  }
}

TEST_CASE("state-multiplicative noise shifts the effective drift") {
  // With C != 0, beta != 0, B = D = 0 the P1 equation is linear:
  // p' = -(q + (c^2 + 2 beta c + 2 a) p). Compare against the closed form of
  // that linear ODE via the oracle with a_eff = a + beta c + c^2/2 and b = 0.
  const double a = 0.1, c = 0.4, beta = 0.3, q = 0.7, g = 0.9, T = 1.0;
  LQModel m = LQModel::scalar(a, 0, 0, c, 0, 0, q, 0, 1.0, g, 0, beta, T);
  const RiccatiSolution sol = solve_riccati(m, 2000);
  const double a_eff = a + beta * c + 0.5 * c * c;
  for (double t : {0.0, 0.5}) {
    const double want = oracles::scalar_riccati_closed_form(t, T, a_eff, 0.0, q, 1.0, g);
    CHECK(sol.P1_at(t)(0, 0) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("nodes stay symmetric and monitored blocks positive definite") {
  const LQModel m = random_psd_model(3, 2, 99);
  const RiccatiSolution sol = solve_riccati(m, 300);
  for (int i = 0; i < sol.nodes(); ++i) {
    const Eigen::MatrixXd& P1 = sol.P1_node(i);
    const Eigen::MatrixXd& P2 = sol.P2_node(i);
    CHECK((P1 - P1.transpose()).norm() == 0.0);
    CHECK((P2 - P2.transpose()).norm() == 0.0);
    const PiCoefficients pi = pi_coefficients(m, P1, P2, sol.phi_node(i));
    CHECK(min_eigenvalue(pi.pi1) > 0.0);
    CHECK(min_eigenvalue(pi.pi2) > 0.0);
  }
}

TEST_CASE("pi coefficients at zero P reduce to R and zero") {
  const LQModel m = random_psd_model(2, 2, 5);
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(2, 2);
  const PiCoefficients pi = pi_coefficients(m, Z, Z, Eigen::VectorXd::Zero(2));
  CHECK(oracles::bitwise_equal(pi.pi1, m.R));
  CHECK(oracles::bitwise_equal(pi.pi2, m.R));
  CHECK(pi.pi3.norm() == 0.0);
  CHECK(pi.pi4.norm() == 0.0);
  CHECK(pi.pi5.norm() == 0.0);
}

TEST_CASE("RK4 converges at fourth order on a stiff-free scalar problem") {
  const double a = 0.3, b = 1.0, q = 1.0, r = 1.0, g = 1.0, T = 1.0;
  LQModel m = LQModel::scalar(a, 0, b, 0, 0, 0, q, 0, r, g, 0, 0.0, T);
  const double exact = oracles::scalar_riccati_closed_form(0.0, T, a, b, q, r, g);
  double prev_err = 0.0;
  std::vector<double> ratios;
  for (int steps : {20, 40, 80}) {
    const double err = std::abs(solve_riccati(m, steps).P1_node(0)(0, 0) - exact);
    if (prev_err > 0.0) ratios.push_back(prev_err / err);
    prev_err = err;
  }
  for (double ratio : ratios) {
    const double order = std::log2(ratio);
    CHECK(order > 3.5);
    CHECK(order < 4.5);
  }
}

TEST_CASE("interpolation is exact at the nodes and refuses out-of-range times") {
  const LQModel m = random_psd_model(2, 1, 31);
  const RiccatiSolution sol = solve_riccati(m, 64);
  const int i = 17;
  CHECK(oracles::bitwise_equal(sol.P1_at(sol.time_at(i)), sol.P1_node(i)));
  CHECK_THROWS_AS(sol.P1_at(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(sol.P1_at(m.T + 0.1), std::invalid_argument);
}

TEST_CASE("solver rejects degenerate step counts") {
  const LQModel m = random_psd_model(1, 1, 2);
  CHECK_THROWS_AS(solve_riccati(m, 0), std::invalid_argument);
}
