#include "mflq/bsde.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

namespace mflq {

MonteCarloEstimate g_expectation_girsanov(double beta,
                                          const Eigen::VectorXd& terminal_samples,
                                          const Eigen::VectorXd& brownian_terminals,
                                          double T) {
  const int P = static_cast<int>(terminal_samples.size());
  if (P < 2 || brownian_terminals.size() != P) {
    throw std::invalid_argument("g_expectation_girsanov: need >= 2 paired samples");
  }
  Eigen::VectorXd weighted(P);
  for (int p = 0; p < P; ++p) {
    weighted(p) = terminal_samples(p) *
                  std::exp(beta * brownian_terminals(p) - 0.5 * beta * beta * T);
  }
  MonteCarloEstimate est;
  est.value = weighted.mean();
  est.stderr_ = std::sqrt((weighted.array() - est.value).square().sum() / (P - 1)) /
                std::sqrt(static_cast<double>(P));
  return est;
}

Driver Driver::linear(double beta) {
  Driver d;
  d.g = [beta](double z) { return beta * z; };
  d.lipschitz = std::abs(beta);
  d.linear_with_beta = true;
  d.beta = beta;
  return d;
}

Driver Driver::zero() {
  Driver d;
  d.g = [](double) { return 0.0; };
  d.lipschitz = 0.0;
  return d;
}

namespace {

// All monomials of total degree <= 2 in the raw features, constant included.
Eigen::MatrixXd quadratic_basis(const Eigen::MatrixXd& F) {
  const int P = static_cast<int>(F.rows());
  const int f = static_cast<int>(F.cols());
  const int K = 1 + f + f * (f + 1) / 2;
  Eigen::MatrixXd B(P, K);
  B.col(0).setOnes();
  B.middleCols(1, f) = F;
  int c = 1 + f;
  for (int i = 0; i < f; ++i) {
    for (int j = i; j < f; ++j) {
      B.col(c++) = F.col(i).cwiseProduct(F.col(j));
    }
  }
  return B;
}

// Least-squares fitted values; falls back to ridge (lambda = 1e-8) when the
// design is rank deficient, flagging `deficient`.
Eigen::VectorXd regress_fitted(const Eigen::MatrixXd& B, const Eigen::VectorXd& y,
                               bool* deficient) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  if (qr.rank() < B.cols()) {
    *deficient = true;
    const Eigen::MatrixXd G =
        B.transpose() * B + 1e-8 * Eigen::MatrixXd::Identity(B.cols(), B.cols());
    return B * G.ldlt().solve(B.transpose() * y);
  }
  return B * qr.solve(y);
}

}  // namespace

BsdeSolution solve_bsde_lsmc(const PathDriver& driver,
                             const Eigen::VectorXd& terminal,
                             const std::vector<Eigen::MatrixXd>& features,
                             const Eigen::MatrixXd& dW,
                             const std::vector<double>& times) {
  const int P = static_cast<int>(terminal.size());
  const int M = static_cast<int>(times.size()) - 1;
  if (M < 1) throw std::invalid_argument("solve_bsde_lsmc: need at least one step");
  if (static_cast<int>(features.size()) != M + 1 || dW.rows() != P || dW.cols() != M) {
    throw std::invalid_argument("solve_bsde_lsmc: shape mismatch");
  }
  const int f = static_cast<int>(features[0].cols());
  const int basis_size = 1 + f + f * (f + 1) / 2;
  if (P < 10 * basis_size) {
    throw std::invalid_argument("solve_bsde_lsmc: need >= 10x basis-size paths");
  }
  for (const auto& F : features) {
    if (!F.allFinite()) throw std::invalid_argument("solve_bsde_lsmc: nonfinite features");
  }

  BsdeSolution sol;
  sol.times = times;
  sol.Y.resize(P, M + 1);
  sol.Z.resize(P, M);
  sol.Y.col(M) = terminal;

  Eigen::VectorXd y0_target;
  for (int m = M - 1; m >= 0; --m) {
    const double h = times[m + 1] - times[m];
    const Eigen::MatrixXd B = quadratic_basis(features[m]);

    const Eigen::VectorXd z_target = sol.Y.col(m + 1).cwiseProduct(dW.col(m)) / h;
    sol.Z.col(m) = regress_fitted(B, z_target, &sol.rank_deficient);

    Eigen::VectorXd y_target(P);
    for (int p = 0; p < P; ++p) {
      y_target(p) = sol.Y(p, m + 1) +
                    driver(p, m, sol.Y(p, m + 1), sol.Z(p, m)) * h;
    }
    sol.Y.col(m) = regress_fitted(B, y_target, &sol.rank_deficient);
    if (m == 0) y0_target = y_target;
  }

  sol.y0 = sol.Y.col(0).mean();
  sol.y0_stderr =
      std::sqrt((y0_target.array() - y0_target.mean()).square().sum() / (P - 1)) /
      std::sqrt(static_cast<double>(P));
  return sol;
}

MonteCarloEstimate backward_semigroup(const PathDriver& driver,
                                      const Eigen::VectorXd& eta,
                                      const std::vector<Eigen::MatrixXd>& features,
                                      const Eigen::MatrixXd& dW,
                                      const std::vector<double>& times,
                                      int m0, int m1) {
  const int M = static_cast<int>(times.size()) - 1;
  if (m0 < 0 || m1 > M || m0 >= m1) {
    throw std::invalid_argument("backward_semigroup: bad subinterval");
  }
  std::vector<Eigen::MatrixXd> sub_features(features.begin() + m0,
                                            features.begin() + m1 + 1);
  std::vector<double> sub_times(times.begin() + m0, times.begin() + m1 + 1);
  const Eigen::MatrixXd sub_dW = dW.middleCols(m0, m1 - m0);
  const PathDriver shifted = [&driver, m0](int p, int m, double y, double z) {
    return driver(p, m + m0, y, z);
  };
  const BsdeSolution sol =
      solve_bsde_lsmc(shifted, eta, sub_features, sub_dW, sub_times);
  return {sol.y0, sol.y0_stderr};
}

double lq_running_cost(const LQModel& model, const EmpiricalMeasure& mu,
                       const Eigen::MatrixXd& controls) {
  if (controls.rows() != mu.size() || controls.cols() != model.k()) {
    throw std::invalid_argument("lq_running_cost: control array shape mismatch");
  }
  const Eigen::VectorXd m = mu.mean();
  const double uRu =
      (controls * model.R).cwiseProduct(controls).sum() / mu.size();
  return mu.variance_functional(model.Q) + m.dot((model.Q + model.Qbar) * m) + uRu;
}

double lq_terminal_cost(const LQModel& model, const EmpiricalMeasure& mu) {
  const Eigen::VectorXd m = mu.mean();
  return mu.variance_functional(model.G) + m.dot((model.G + model.Gbar) * m);
}

double pathwise_weighted_cost(const LQModel& model, const ParticleEnsemble& ens,
                              const LQPolicy& policy, double beta) {
  const int M = ens.path.steps();
  const double h = ens.path.h();
  const Eigen::VectorXd W = ens.path.cumulative();
  const double t0 = ens.path.t0();

  double cost = 0.0;
  for (int m = 0; m < M; ++m) {
    const Eigen::MatrixXd& X = ens.states[m];
    const Eigen::VectorXd mbar = X.colwise().mean().transpose();
    const Eigen::MatrixXd U = policy(ens.path.times[m], X, mbar);
    const double psi_w =
        std::exp(beta * W(m) - 0.5 * beta * beta * (ens.path.times[m] - t0));
    cost += psi_w * lq_running_cost(model, EmpiricalMeasure(X), U) * h;
  }
  const double psi_T =
      std::exp(beta * W(M) - 0.5 * beta * beta * (ens.path.times[M] - t0));
  cost += psi_T * lq_terminal_cost(model, EmpiricalMeasure(ens.states[M]));
  return cost;
}

MonteCarloEstimate lq_cost_estimate(const LQModel& model, const LQPolicy& policy,
                                    const Eigen::MatrixXd& initial, int sde_steps,
                                    int n_paths, std::uint64_t seed) {
  if (n_paths < 2) throw std::invalid_argument("lq_cost_estimate: need >= 2 paths");
  Eigen::VectorXd costs(n_paths);
  for (int p = 0; p < n_paths; ++p) {
    const std::uint64_t s = seed + static_cast<std::uint64_t>(p) * 0x9E3779B97F4A7C15ull;
    const CommonNoisePath path = generate_common_path(0.0, model.T, sde_steps, s);
    const ParticleEnsemble ens = simulate_lq(model, policy, initial, path);
    costs(p) = pathwise_weighted_cost(model, ens, policy, model.beta);
  }
  MonteCarloEstimate est;
  est.value = costs.mean();
  est.stderr_ = std::sqrt((costs.array() - est.value).square().sum() / (n_paths - 1)) /
                std::sqrt(static_cast<double>(n_paths));
  return est;
}

}  // namespace mflq
