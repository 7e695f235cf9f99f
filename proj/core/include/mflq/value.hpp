#pragma once

#include <Eigen/Core>

#include "mflq/measure.hpp"
#include "mflq/model.hpp"
#include "mflq/riccati.hpp"

namespace mflq {

/// Semi-feedback control law u(t, x, mu_bar) = K_dev (x - mu_bar)
/// + K_mean mu_bar + c, with time frozen at the evaluation instant.
struct LinearFeedback {
  Eigen::MatrixXd K_dev;   // k x n
  Eigen::MatrixXd K_mean;  // k x n
  Eigen::VectorXd c;       // k

  Eigen::VectorXd operator()(const Eigen::VectorXd& x,
                             const Eigen::VectorXd& mu_bar) const {
    return K_dev * (x - mu_bar) + K_mean * mu_bar + c;
  }
};

/// Quadratic value function V(t, mu) = Var(mu)(P1(t)) + mu_bar' P2(t) mu_bar
/// + mu_bar' phi(t) + psi(t), together with the synthesized feedback, the
/// control functional Psi and the generator-equation residual.
class QuadraticValue {
 public:
  QuadraticValue(LQModel model, RiccatiSolution ric);

  const LQModel& model() const { return model_; }
  const RiccatiSolution& riccati() const { return ric_; }

  double value(double t, const EmpiricalMeasure& mu) const;

  // Minimizing feedback at time t: K_dev = -Pi1^{-1} Pi3', K_mean =
  // -Pi2^{-1} Pi4', c = -1/2 Pi2^{-1} Pi5. Requires Pi1, Pi2 invertible.
  LinearFeedback optimal_feedback(double t) const;

  // Psi_t^mu(u) = Var(u_#mu)(Pi1) + ubar' Pi2 ubar
  //   + 2 (1/N) sum_i (x_i - mu_bar)' Pi3 u(x_i) + <2 Pi4' mu_bar + Pi5, ubar>.
  double psi_functional(double t, const EmpiricalMeasure& mu,
                        const ControlMap& u) const;

  // Closed-form minimum of Psi over control maps (square-completion value).
  double psi_minimum(double t, const EmpiricalMeasure& mu) const;

  // Defect of the generator equation at (t, mu), evaluated with the analytic
  // time derivatives of (P1, P2, phi, psi); identically zero when the
  // backward system holds exactly at the interpolated coefficients.
  double hjb_residual(double t, const EmpiricalMeasure& mu) const;

 private:
  LQModel model_;
  RiccatiSolution ric_;
};

}  // namespace mflq
