#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mflq/bsde.hpp"
#include "mflq/measure.hpp"
#include "mflq/model.hpp"
#include "mflq/sde.hpp"
#include "mflq/value.hpp"

namespace mflq {

/// One statistical check: pass iff |statistic| <= tolerance (or statistic >=
/// -tolerance when one_sided). Fully reproducible from seeds and sizes.
struct CheckReport {
  std::string name;
  double statistic = 0.0;
  double tolerance = 0.0;
  double stderr_ = 0.0;
  bool one_sided = false;
  bool pass = false;
  std::string details;

  void finalize() {
    pass = one_sided ? statistic >= -tolerance : std::abs(statistic) <= tolerance;
  }
};

struct CheckSizes {
  int particles = 2000;
  int paths = 200;
  int sde_steps = 200;
};

// Simulated recursive cost of the synthesized feedback against the
// closed-form value at the same initial cloud: pass within
// max(3 stderr, 2% relative).
CheckReport value_cost_check(const QuadraticValue& qv,
                             const Eigen::MatrixXd& initial,
                             const CheckSizes& sizes, std::uint64_t seed);

// Backward-semigroup consistency: G_{t,t+delta}[V(t+delta, rho_{t+delta})]
// against V(t, mu). Tolerance 3 stderr + (1+|V|)(h + 1/sqrt(N)).
CheckReport dpp_residual_check(const QuadraticValue& qv, double t, double delta,
                               const Eigen::MatrixXd& initial,
                               const CheckSizes& sizes, std::uint64_t seed);

// Value depends on the initial condition only through its law: closed-loop
// costs from two independent same-law clouds agree within 3 combined stderr,
// and the closed-form value is exactly permutation invariant.
CheckReport law_invariance_check(const QuadraticValue& qv,
                                 const Eigen::MatrixXd& cloud_a,
                                 const Eigen::MatrixXd& cloud_b,
                                 const CheckSizes& sizes, std::uint64_t seed);

// Every perturbed feedback u* + eps K costs at least as much (common random
// numbers); the fitted quadratic in eps has positive curvature and vertex
// within 0.05 of zero.
CheckReport optimality_gap_check(const QuadraticValue& qv,
                                 const Eigen::MatrixXd& initial,
                                 int n_perturbations,
                                 const std::vector<double>& eps_levels,
                                 const CheckSizes& sizes, std::uint64_t seed);

// Ordered driver/terminal pairs keep ordered initial values: counts trials
// with Y0^1 - Y0^2 < -3 combined stderr; passes on zero violations.
CheckReport comparison_check(int trials, int paths_per_trial, int steps,
                             std::uint64_t seed);

// Fitted-constant stability bounds: (a) forward W2 stability under initial
// perturbations, (b) backward-solution stability under terminal
// perturbations, (c) sqrt-delta time regularity of the value.
std::vector<CheckReport> stability_checks(const QuadraticValue& qv,
                                          const Eigen::MatrixXd& initial,
                                          const CheckSizes& sizes,
                                          std::uint64_t seed);

// Monte-Carlo scaling of the initial backward value across batches:
// log-log slope of across-batch std versus batch size, expected near -1/2.
CheckReport y0_determinism_check(double beta, double T,
                                 const std::vector<int>& batch_sizes,
                                 int batches, std::uint64_t seed);

}  // namespace mflq
