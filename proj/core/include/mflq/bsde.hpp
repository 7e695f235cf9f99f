#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "mflq/model.hpp"
#include "mflq/sde.hpp"

namespace mflq {

struct MonteCarloEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// Nonlinear expectation with linear driver g(z) = beta z, evaluated by the
// exponential-weight (change of measure) representation:
//   estimate = mean of chi * exp(beta W_T - beta^2 T / 2).
MonteCarloEstimate g_expectation_girsanov(double beta,
                                          const Eigen::VectorXd& terminal_samples,
                                          const Eigen::VectorXd& brownian_terminals,
                                          double T);

/// Scalar driver for the backward equation. g(0) = 0 is required for
/// nonlinear-expectation use; `linear_with_beta` marks g(z) = beta z.
struct Driver {
  std::function<double(double)> g;
  double lipschitz = 1.0;
  bool linear_with_beta = false;
  double beta = 0.0;

  static Driver linear(double beta);
  static Driver zero();
};

// Full driver with path/node context, for drivers that carry a running cost
// or cross-path (law) statistics.
using PathDriver =
    std::function<double(int path, int node, double y, double z)>;

/// Gridded backward solution from least-squares induction. Y and fitted Z are
/// per path per node; y0/y0_stderr summarize the initial node.
struct BsdeSolution {
  std::vector<double> times;
  Eigen::MatrixXd Y;  // P x (M+1)
  Eigen::MatrixXd Z;  // P x M (regression estimate, Z at node m)
  double y0 = 0.0;
  double y0_stderr = 0.0;
  bool rank_deficient = false;  // any backward step hit the ridge fallback
};

// Least-squares Monte-Carlo backward induction.
//   Y_M = terminal;  Z_m = regression of Y_{m+1} dW_m / h;
//   Y_m = regression of Y_{m+1} + f(p, m, Y_{m+1}, Z_m) h.
// `features[m]` is the P x F raw feature matrix at node m; the regression
// basis is all monomials of total degree <= 2 in the features. Requires
// P >= 10 x basis size. Ridge fallback lambda = 1e-8 on rank deficiency.
BsdeSolution solve_bsde_lsmc(const PathDriver& driver,
                             const Eigen::VectorXd& terminal,
                             const std::vector<Eigen::MatrixXd>& features,
                             const Eigen::MatrixXd& dW,
                             const std::vector<double>& times);

// Backward semigroup: backward induction on the subgrid [m0, m1] only,
// started from eta at node m1; returns the node-m0 estimate.
MonteCarloEstimate backward_semigroup(const PathDriver& driver,
                                      const Eigen::VectorXd& eta,
                                      const std::vector<Eigen::MatrixXd>& features,
                                      const Eigen::MatrixXd& dW,
                                      const std::vector<double>& times,
                                      int m0, int m1);

// Lifted running and terminal cost of the LQ problem:
//   f0 = Var(mu)(Q) + mu_bar'(Q+Qbar) mu_bar + (1/N) sum u_i' R u_i,
//   Phi0 = Var(mu)(G) + mu_bar'(G+Gbar) mu_bar.
double lq_running_cost(const LQModel& model, const EmpiricalMeasure& mu,
                       const Eigen::MatrixXd& controls);
double lq_terminal_cost(const LQModel& model, const EmpiricalMeasure& mu);

// Pathwise exponentially-weighted cost along one simulated ensemble:
//   Psi_T Phi0(rho_T) + sum_m Psi_{t_m} f0(rho_{t_m}, u_m) h,
// Psi_t = exp(beta W_t - beta^2 t / 2) on the ensemble's common path.
double pathwise_weighted_cost(const LQModel& model, const ParticleEnsemble& ens,
                              const LQPolicy& policy, double beta);

// Recursive cost of a policy: averages the pathwise weighted cost over
// `n_paths` independent common-noise paths, all started from `initial`.
// Deterministic in seed; path p uses seed + p * 0x9E3779B97F4A7C15.
MonteCarloEstimate lq_cost_estimate(const LQModel& model, const LQPolicy& policy,
                                    const Eigen::MatrixXd& initial, int sde_steps,
                                    int n_paths, std::uint64_t seed);

}  // namespace mflq
