#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mflq/measure.hpp"
#include "mflq/model.hpp"
#include "mflq/value.hpp"

namespace mflq {

/// One realization of the shared (common) Brownian motion on a uniform grid.
struct CommonNoisePath {
  std::vector<double> times;       // M+1 node times
  Eigen::VectorXd increments;      // M Gaussian(0, h) draws
  std::uint64_t seed = 0;
  double step = 0.0;               // uniform node spacing, stored once so that
                                   // sub-paths reuse it bit for bit

  int steps() const { return static_cast<int>(increments.size()); }
  double h() const { return step; }
  double t0() const { return times.front(); }
  double horizon() const { return times.back(); }

  // Brownian values at the nodes (starting from 0 at t0).
  Eigen::VectorXd cumulative() const;

  // Sub-path on nodes [m0, m1], reusing the stored node times exactly.
  CommonNoisePath tail(int m0, int m1) const;
};

CommonNoisePath generate_common_path(double t0, double T, int steps,
                                     std::uint64_t seed);

/// Caller-supplied drift/diffusion for the general McKean-Vlasov dynamics,
/// with scalar driving noise: b, sigma map (x, mu, u) to R^n.
struct CoefficientSet {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const EmpiricalMeasure&,
                                const Eigen::VectorXd&)> drift;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, const EmpiricalMeasure&,
                                const Eigen::VectorXd&)> diffusion;
  double drift_lipschitz = 1.0;
  double diffusion_lipschitz = 1.0;
};

// Per-particle policy with access to the pre-step empirical measure.
using ParticlePolicy = std::function<Eigen::VectorXd(
    double t, const Eigen::VectorXd& x, const EmpiricalMeasure& mu)>;

// Vectorized policy for the LQ fast path: (t, states N x n, ensemble mean)
// -> controls N x k.
using LQPolicy = std::function<Eigen::MatrixXd(
    double t, const Eigen::MatrixXd& states, const Eigen::VectorXd& mu_bar)>;

/// N interacting trajectories sharing one common-noise path. states[m] is the
/// N x n ensemble at node m.
struct ParticleEnsemble {
  std::vector<Eigen::MatrixXd> states;
  CommonNoisePath path;
  std::string policy_name;

  int particles() const { return static_cast<int>(states.front().rows()); }
  int dim() const { return static_cast<int>(states.front().cols()); }

  // The empirical flow at node m (the N-point cloud of states).
  EmpiricalMeasure measure_at(int m) const;
};

// Euler-Maruyama for the general dynamics; all particles share the path's
// increments, the measure argument is the pre-step ensemble cloud.
ParticleEnsemble simulate_forward(const CoefficientSet& coeffs,
                                  const Eigen::MatrixXd& initial,
                                  const ParticlePolicy& policy,
                                  const CommonNoisePath& path);

// Euler-Maruyama for dX = (AX + Abar mu_bar + Bu)dt + (CX + Cbar mu_bar + Du)dW,
// vectorized over the ensemble.
ParticleEnsemble simulate_lq(const LQModel& model, const LQPolicy& policy,
                             const Eigen::MatrixXd& initial,
                             const CommonNoisePath& path);

// LQ dynamics driven by the synthesized optimal feedback.
ParticleEnsemble simulate_lq_closed_loop(const QuadraticValue& qv,
                                         const Eigen::MatrixXd& initial,
                                         const CommonNoisePath& path);

LQPolicy closed_loop_policy(const QuadraticValue& qv);

// Euler integration of the conditional-mean dynamics
//   d xbar = [(A+Abar) xbar + B ubar] dt + [(C+Cbar) xbar + D ubar] dW,
// ubar = K_mean xbar + c; the oracle for the ensemble average.
Eigen::MatrixXd conditional_mean_path(const QuadraticValue& qv,
                                      const Eigen::VectorXd& xbar0,
                                      const CommonNoisePath& path);

// Gaussian cloud with given mean and (diagonal Cholesky of) covariance,
// deterministic in seed.
Eigen::MatrixXd gaussian_cloud(const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& cov, int count,
                               std::uint64_t seed);

}  // namespace mflq
