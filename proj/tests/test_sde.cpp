#include <doctest.h>

#include "mflq/sde.hpp"
#include "oracles.hpp"

using namespace mflq;

TEST_CASE("common path: shape, determinism, cumulative sums") {
  const CommonNoisePath p = generate_common_path(0.0, 1.0, 100, 7);
  CHECK(p.steps() == 100);
  CHECK(p.times.size() == 101);
  CHECK(p.t0() == 0.0);
  CHECK(p.horizon() == 1.0);
  CHECK(p.h() == doctest::Approx(0.01));

  const CommonNoisePath q = generate_common_path(0.0, 1.0, 100, 7);
  CHECK(oracles::bitwise_equal(p.increments, q.increments));
  const CommonNoisePath r = generate_common_path(0.0, 1.0, 100, 8);
  CHECK_FALSE(oracles::bitwise_equal(p.increments, r.increments));

  const Eigen::VectorXd w = p.cumulative();
  CHECK(w(0) == 0.0);
  CHECK(w(100) == doctest::Approx(p.increments.sum()).epsilon(1e-14));
}

TEST_CASE("common path increments have the right scale") {
  const int M = 20000;
  const CommonNoisePath p = generate_common_path(0.0, 1.0, M, 123);
  const double h = 1.0 / M;
  const double var = p.increments.squaredNorm() / M;
  CHECK(var == doctest::Approx(h).epsilon(0.05));
  CHECK(std::abs(p.increments.mean()) < 3.0 * std::sqrt(h / M));
}

TEST_CASE("tail reuses node times exactly and rejects bad ranges") {
  const CommonNoisePath p = generate_common_path(0.25, 1.0, 30, 9);
  const CommonNoisePath sub = p.tail(10, 25);
  CHECK(sub.steps() == 15);
  CHECK(sub.times.front() == p.times[10]);
  CHECK(sub.times.back() == p.times[25]);
  CHECK(oracles::bitwise_equal(sub.increments, p.increments.segment(10, 15)));
  CHECK_THROWS_AS(p.tail(5, 5), std::invalid_argument);
  CHECK_THROWS_AS(p.tail(-1, 5), std::invalid_argument);
  CHECK_THROWS_AS(p.tail(0, 31), std::invalid_argument);
}

TEST_CASE("restarting from a mid node reproduces the trajectory bitwise") {
  const LQModel m = random_psd_model(2, 1, 13);
  const CommonNoisePath path = generate_common_path(0.0, m.T, 50, 14);
  const Eigen::MatrixXd init = oracles::random_cloud(8, 2, 15);
  const LQPolicy zero_u = [](double, const Eigen::MatrixXd& X, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Zero(X.rows(), 1).eval();
  };
  const ParticleEnsemble full = simulate_lq(m, zero_u, init, path);
  const int mid = 20;
  const ParticleEnsemble rest = simulate_lq(m, zero_u, full.states[mid], path.tail(mid, 50));
  for (int s = 0; s <= 30; ++s) {
    CHECK(oracles::bitwise_equal(rest.states[s], full.states[mid + s]));
  }
}

TEST_CASE("zero dynamics freeze the ensemble") {
  const LQModel m = LQModel::zero(2, 1);
  const CommonNoisePath path = generate_common_path(0.0, 1.0, 25, 3);
  const Eigen::MatrixXd init = oracles::random_cloud(5, 2, 4);
  const LQPolicy zero_u = [](double, const Eigen::MatrixXd& X, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Zero(X.rows(), 1).eval();
  };
  const ParticleEnsemble ens = simulate_lq(m, zero_u, init, path);
  CHECK(static_cast<int>(ens.states.size()) == 26);
  for (const auto& X : ens.states) CHECK(oracles::bitwise_equal(X, init));
}

TEST_CASE("pure scalar drift reproduces the Euler recursion exactly") {
  // dX = a X dt, no noise: X_m = X_0 (1 + a h)^m for every particle.
  const double a = 0.5, T = 1.0;
  LQModel m = LQModel::scalar(a, 0, 0, 0, 0, 0, 0, 0, 1.0, 0, 0, 0.0, T);
  const int M = 10;
  const CommonNoisePath path = generate_common_path(0.0, T, M, 5);
  Eigen::MatrixXd init(3, 1);
  init << 1.0, -2.0, 0.5;
  const LQPolicy zero_u = [](double, const Eigen::MatrixXd& X, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Zero(X.rows(), 1).eval();
  };
  const ParticleEnsemble ens = simulate_lq(m, zero_u, init, path);
  const double h = T / M;
  for (int s = 0; s <= M; ++s) {
    const double factor = std::pow(1.0 + a * h, s);
    CHECK(ens.states[s].isApprox((factor * init).eval(), 1e-13));
  }
}

TEST_CASE("generic and vectorized steppers agree on the LQ dynamics") {
  const LQModel m = random_psd_model(2, 2, 31);
  const CommonNoisePath path = generate_common_path(0.0, m.T, 40, 32);
  const Eigen::MatrixXd init = oracles::random_cloud(6, 2, 33);
  Eigen::MatrixXd K = oracles::random_cloud(2, 2, 34);

  const LQPolicy vec = [&K](double, const Eigen::MatrixXd& X, const Eigen::VectorXd&) {
    return Eigen::MatrixXd(X * K.transpose());
  };
  CoefficientSet cs;
  cs.drift = [&m, &K](const Eigen::VectorXd& x, const EmpiricalMeasure& mu,
                      const Eigen::VectorXd& u) {
    return Eigen::VectorXd(m.A * x + m.Abar * mu.mean() + m.B * u);
  };
  cs.diffusion = [&m](const Eigen::VectorXd& x, const EmpiricalMeasure& mu,
                      const Eigen::VectorXd& u) {
    return Eigen::VectorXd(m.C * x + m.Cbar * mu.mean() + m.D * u);
  };
  const ParticlePolicy per = [&K](double, const Eigen::VectorXd& x,
                                  const EmpiricalMeasure&) {
    return Eigen::VectorXd(K * x);
  };

  const ParticleEnsemble a = simulate_lq(m, vec, init, path);
  const ParticleEnsemble b = simulate_forward(cs, init, per, path);
  for (int s = 0; s <= 40; ++s) CHECK(a.states[s].isApprox(b.states[s], 1e-12));
}

TEST_CASE("ensemble average follows the conditional-mean recursion") {
  const LQModel m = random_psd_model(2, 1, 41);
  const QuadraticValue qv(m, solve_riccati(m, 400));
  const CommonNoisePath path = generate_common_path(0.0, m.T, 60, 42);
  const Eigen::MatrixXd init = gaussian_cloud(
      Eigen::VectorXd::Constant(2, 0.4), Eigen::MatrixXd::Identity(2, 2), 50, 43);
  const ParticleEnsemble ens = simulate_lq_closed_loop(qv, init, path);
  const Eigen::MatrixXd mbar = conditional_mean_path(
      qv, init.colwise().mean().transpose(), path);
  for (int s = 0; s <= 60; ++s) {
    const Eigen::VectorXd got = ens.states[s].colwise().mean().transpose();
    CHECK(got.isApprox(mbar.row(s).transpose().eval(), 1e-9));
  }
  CHECK(ens.policy_name == "closed_loop");
}

TEST_CASE("blow-up raises a runtime error naming the step") {
  LQModel m = LQModel::zero(1, 1, 1.0);
  m.A = Eigen::MatrixXd::Constant(1, 1, 1e200);
  const CommonNoisePath path = generate_common_path(0.0, 1.0, 10, 1);
  Eigen::MatrixXd init(2, 1);
  init << 1.0, 2.0;
  const LQPolicy zero_u = [](double, const Eigen::MatrixXd& X, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Zero(X.rows(), 1).eval();
  };
  CHECK_THROWS_AS(simulate_lq(m, zero_u, init, path), std::runtime_error);
}

TEST_CASE("single-particle ensembles are refused") {
  const LQModel m = random_psd_model(1, 1, 6);
  const CommonNoisePath path = generate_common_path(0.0, m.T, 5, 2);
  const LQPolicy zero_u = [](double, const Eigen::MatrixXd& X, const Eigen::VectorXd&) {
    return Eigen::MatrixXd::Zero(X.rows(), 1).eval();
  };
  CHECK_THROWS_AS(simulate_lq(m, zero_u, Eigen::MatrixXd::Ones(1, 1), path),
                  std::invalid_argument);
}

TEST_CASE("gaussian cloud hits its moments and is seed-deterministic") {
  Eigen::VectorXd mean(2);
  mean << 1.0, -2.0;
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.5, 0.5, 1.0;
  const Eigen::MatrixXd X = gaussian_cloud(mean, cov, 20000, 99);
  CHECK(X.colwise().mean().transpose().isApprox(mean, 0.05));
  const Eigen::MatrixXd centered = X.rowwise() - X.colwise().mean();
  const Eigen::MatrixXd S = centered.transpose() * centered / (X.rows() - 1.0);
  CHECK(S.isApprox(cov, 0.08));
  CHECK(oracles::bitwise_equal(gaussian_cloud(mean, cov, 10, 7),
                               gaussian_cloud(mean, cov, 10, 7)));
}
