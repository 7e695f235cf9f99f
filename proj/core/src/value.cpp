#include "mflq/value.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <stdexcept>

namespace mflq {

QuadraticValue::QuadraticValue(LQModel model, RiccatiSolution ric)
    : model_(std::move(model)), ric_(std::move(ric)) {
  model_.validate();
  if (std::abs(ric_.horizon() - model_.T) > 1e-12) {
    throw std::invalid_argument("QuadraticValue: solution horizon differs from model T");
  }
}

double QuadraticValue::value(double t, const EmpiricalMeasure& mu) const {
  if (t < -1e-12 || t > model_.T + 1e-12) {
    throw std::invalid_argument("value: t outside [0, T]");
  }
  if (mu.dim() != model_.n()) throw std::invalid_argument("value: measure dimension mismatch");
  const Eigen::VectorXd m = mu.mean();
  return mu.variance_functional(ric_.P1_at(t)) + m.dot(ric_.P2_at(t) * m) +
         m.dot(ric_.phi_at(t)) + ric_.psi_at(t);
}

LinearFeedback QuadraticValue::optimal_feedback(double t) const {
  const Eigen::MatrixXd P1 = ric_.P1_at(t);
  const Eigen::MatrixXd P2 = ric_.P2_at(t);
  const Eigen::VectorXd phi = ric_.phi_at(t);
  const PiCoefficients pc = pi_coefficients(model_, P1, P2, phi);
  if (min_eigenvalue(pc.pi1) <= 0.0 || min_eigenvalue(pc.pi2) <= 0.0) {
    throw std::runtime_error("optimal_feedback: Pi1/Pi2 not positive definite");
  }
  LinearFeedback fb;
  fb.K_dev = -pc.pi1.ldlt().solve(pc.pi3.transpose());
  fb.K_mean = -pc.pi2.ldlt().solve(pc.pi4.transpose());
  fb.c = -0.5 * pc.pi2.ldlt().solve(pc.pi5);
  return fb;
}

double QuadraticValue::psi_functional(double t, const EmpiricalMeasure& mu,
                                      const ControlMap& u) const {
  const PiCoefficients pc =
      pi_coefficients(model_, ric_.P1_at(t), ric_.P2_at(t), ric_.phi_at(t));
  const int N = mu.size();
  const Eigen::VectorXd mbar = mu.mean();

  // Image statistics under Pi1 plus the Pi3 cross term in one sweep.
  Eigen::MatrixXd img(N, model_.k());
  double cross = 0.0;
  for (int i = 0; i < N; ++i) {
    const Eigen::VectorXd xi = mu.samples().row(i).transpose();
    const Eigen::VectorXd ui = u(xi);
    if (ui.size() != model_.k()) {
      throw std::invalid_argument("psi_functional: control output dimension mismatch");
    }
    img.row(i) = ui.transpose();
    cross += (xi - mbar).dot(pc.pi3 * ui);
  }
  cross *= 2.0 / N;

  EmpiricalMeasure image(std::move(img));
  const Eigen::VectorXd ubar = image.mean();
  return image.variance_functional(pc.pi1) + ubar.dot(pc.pi2 * ubar) + cross +
         (2.0 * pc.pi4.transpose() * mbar + pc.pi5).dot(ubar);
}

double QuadraticValue::psi_minimum(double t, const EmpiricalMeasure& mu) const {
  const PiCoefficients pc =
      pi_coefficients(model_, ric_.P1_at(t), ric_.P2_at(t), ric_.phi_at(t));
  const Eigen::VectorXd mbar = mu.mean();
  const Eigen::MatrixXd M1 = pc.pi3 * pc.pi1.ldlt().solve(pc.pi3.transpose());
  const Eigen::VectorXd lin = 2.0 * pc.pi4.transpose() * mbar + pc.pi5;
  return -mu.variance_functional(((M1 + M1.transpose()) / 2.0).eval()) -
         0.25 * lin.dot(pc.pi2.ldlt().solve(lin));
}

double QuadraticValue::hjb_residual(double t, const EmpiricalMeasure& mu) const {
  if (t < -1e-12 || t >= model_.T) {
    throw std::invalid_argument("hjb_residual: t outside [0, T)");
  }
  const Eigen::MatrixXd P1 = ric_.P1_at(t);
  const Eigen::MatrixXd P2 = ric_.P2_at(t);
  const Eigen::VectorXd phi = ric_.phi_at(t);
  const RiccatiDerivatives d = riccati_rhs(model_, P1, P2, phi);

  const Eigen::MatrixXd Ac = model_.A + model_.Abar;
  const Eigen::MatrixXd Cc = model_.C + model_.Cbar;
  const Eigen::VectorXd mbar = mu.mean();

  const Eigen::MatrixXd var_block =
      d.dP1 + model_.Q + model_.C.transpose() * P1 * model_.C +
      P1 * model_.A + model_.A.transpose() * P1 +
      model_.beta * (P1 * model_.C + model_.C.transpose() * P1);
  const Eigen::MatrixXd mean_block =
      d.dP2 + model_.Q + model_.Qbar + Cc.transpose() * P2 * Cc + P2 * Ac +
      Ac.transpose() * P2 + model_.beta * (P2 * Cc + Cc.transpose() * P2);
  const Eigen::VectorXd lin_block =
      d.dphi + (Ac + model_.beta * Cc).transpose() * phi;

  const LinearFeedback fb = optimal_feedback(t);
  const ControlMap ustar = [&](const Eigen::VectorXd& x) { return fb(x, mbar); };

  return psi_functional(t, mu, ustar) +
         mu.variance_functional(((var_block + var_block.transpose()) / 2.0).eval()) +
         mbar.dot(mean_block * mbar) + mbar.dot(lin_block) + d.dpsi;
}

}  // namespace mflq
