#include "mflq/riccati.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mflq {

PiCoefficients pi_coefficients(const LQModel& model, const Eigen::MatrixXd& P1,
                               const Eigen::MatrixXd& P2,
                               const Eigen::VectorXd& phi) {
  const int n = model.n();
  const int k = model.k();
  if (P1.rows() != n || P1.cols() != n || P2.rows() != n || P2.cols() != n ||
      phi.size() != n) {
    throw std::invalid_argument("pi_coefficients: shape mismatch");
  }
  const Eigen::MatrixXd BbD = model.B + model.beta * model.D;  // n x k
  PiCoefficients pc;
  pc.pi1 = model.D.transpose() * P1 * model.D + model.R;
  pc.pi2 = model.D.transpose() * P2 * model.D + model.R;
  pc.pi3 = model.C.transpose() * P1 * model.D + P1 * BbD;
  pc.pi4 = (model.C + model.Cbar).transpose() * P2 * model.D + P2 * BbD;
  pc.pi5 = BbD.transpose() * phi;
  (void)k;
  return pc;
}

RiccatiDerivatives riccati_rhs(const LQModel& model, const Eigen::MatrixXd& P1,
                               const Eigen::MatrixXd& P2,
                               const Eigen::VectorXd& phi) {
  const PiCoefficients pc = pi_coefficients(model, P1, P2, phi);
  const Eigen::MatrixXd Ac = model.A + model.Abar;
  const Eigen::MatrixXd Cc = model.C + model.Cbar;

  const auto ldlt1 = pc.pi1.ldlt();
  const auto ldlt2 = pc.pi2.ldlt();

  Eigen::MatrixXd F1 =
      model.Q + model.C.transpose() * P1 * model.C + P1 * model.A +
      model.A.transpose() * P1 +
      model.beta * (P1 * model.C + model.C.transpose() * P1) -
      pc.pi3 * ldlt1.solve(pc.pi3.transpose());
  Eigen::MatrixXd F2 =
      model.Q + model.Qbar + Cc.transpose() * P2 * Cc + P2 * Ac +
      Ac.transpose() * P2 + model.beta * (P2 * Cc + Cc.transpose() * P2) -
      pc.pi4 * ldlt2.solve(pc.pi4.transpose());
  Eigen::VectorXd Fphi =
      (Ac + model.beta * Cc).transpose() * phi - pc.pi4 * ldlt2.solve(pc.pi5);

  RiccatiDerivatives d;
  d.dP1 = -((F1 + F1.transpose()) / 2.0);
  d.dP2 = -((F2 + F2.transpose()) / 2.0);
  d.dphi = -Fphi;
  d.dpsi = 0.25 * pc.pi5.dot(ldlt2.solve(pc.pi5));
  return d;
}

RiccatiSolution::RiccatiSolution(std::vector<double> grid,
                                 std::vector<Eigen::MatrixXd> P1,
                                 std::vector<Eigen::MatrixXd> P2,
                                 std::vector<Eigen::VectorXd> phi,
                                 std::vector<double> psi)
    : grid_(std::move(grid)), P1_(std::move(P1)), P2_(std::move(P2)),
      phi_(std::move(phi)), psi_(std::move(psi)) {
  if (grid_.size() < 2 || P1_.size() != grid_.size() ||
      P2_.size() != grid_.size() || phi_.size() != grid_.size() ||
      psi_.size() != grid_.size()) {
    throw std::invalid_argument("RiccatiSolution: inconsistent node arrays");
  }
}

std::pair<int, double> RiccatiSolution::locate(double t) const {
  if (t < grid_.front() - 1e-12 || t > grid_.back() + 1e-12) {
    throw std::invalid_argument("RiccatiSolution: time outside [0, T]");
  }
  const double h = grid_[1] - grid_[0];
  int i = static_cast<int>(std::floor((t - grid_.front()) / h));
  if (i < 0) i = 0;
  if (i >= nodes() - 1) i = nodes() - 2;
  double theta = (t - grid_[i]) / h;
  if (theta < 0.0) theta = 0.0;
  if (theta > 1.0) theta = 1.0;
  return {i, theta};
}

Eigen::MatrixXd RiccatiSolution::P1_at(double t) const {
  auto [i, th] = locate(t);
  return (1.0 - th) * P1_[i] + th * P1_[i + 1];
}
Eigen::MatrixXd RiccatiSolution::P2_at(double t) const {
  auto [i, th] = locate(t);
  return (1.0 - th) * P2_[i] + th * P2_[i + 1];
}
Eigen::VectorXd RiccatiSolution::phi_at(double t) const {
  auto [i, th] = locate(t);
  return (1.0 - th) * phi_[i] + th * phi_[i + 1];
}
double RiccatiSolution::psi_at(double t) const {
  auto [i, th] = locate(t);
  return (1.0 - th) * psi_[i] + th * psi_[i + 1];
}

namespace {

struct State {
  Eigen::MatrixXd P1, P2;
  Eigen::VectorXd phi;
  double psi;
};

State axpy(const State& s, double a, const RiccatiDerivatives& d) {
  State out;
  out.P1 = s.P1 + a * d.dP1;
  out.P2 = s.P2 + a * d.dP2;
  out.phi = s.phi + a * d.dphi;
  out.psi = s.psi + a * d.dpsi;
  out.P1 = ((out.P1 + out.P1.transpose()) / 2.0).eval();
  out.P2 = ((out.P2 + out.P2.transpose()) / 2.0).eval();
  return out;
}

void check_node(const LQModel& model, const State& s, double t) {
  if (!s.P1.allFinite() || !s.P2.allFinite() || !s.phi.allFinite() ||
      !std::isfinite(s.psi)) {
    throw std::runtime_error("solve_riccati: nonfinite values at t = " + std::to_string(t));
  }
  const PiCoefficients pc = pi_coefficients(model, s.P1, s.P2, s.phi);
  if (min_eigenvalue(pc.pi1) <= 0.0 || min_eigenvalue(pc.pi2) <= 0.0) {
    throw std::runtime_error(
        "solve_riccati: Pi1/Pi2 lost positive definiteness at t = " + std::to_string(t));
  }
}

}  // namespace

RiccatiSolution solve_riccati(const LQModel& model, int steps) {
  if (steps < 1) throw std::invalid_argument("solve_riccati: steps must be >= 1");
  LQModel m = model;
  m.validate();

  const int M = steps;
  const double h = m.T / M;
  const int n = m.n();

  std::vector<double> grid(M + 1);
  for (int i = 0; i <= M; ++i) grid[i] = i * h;

  std::vector<Eigen::MatrixXd> P1(M + 1), P2(M + 1);
  std::vector<Eigen::VectorXd> phi(M + 1);
  std::vector<double> psi(M + 1);

  State s{m.G, m.G + m.Gbar, Eigen::VectorXd::Zero(n), 0.0};
  P1[M] = s.P1; P2[M] = s.P2; phi[M] = s.phi; psi[M] = s.psi;
  check_node(m, s, m.T);

  for (int i = M; i > 0; --i) {
    const double step = -h;  // backward in time
    const RiccatiDerivatives k1 = riccati_rhs(m, s.P1, s.P2, s.phi);
    const State s2 = axpy(s, step / 2.0, k1);
    const RiccatiDerivatives k2 = riccati_rhs(m, s2.P1, s2.P2, s2.phi);
    const State s3 = axpy(s, step / 2.0, k2);
    const RiccatiDerivatives k3 = riccati_rhs(m, s3.P1, s3.P2, s3.phi);
    const State s4 = axpy(s, step, k3);
    const RiccatiDerivatives k4 = riccati_rhs(m, s4.P1, s4.P2, s4.phi);

    RiccatiDerivatives combo;
    combo.dP1 = (k1.dP1 + 2.0 * k2.dP1 + 2.0 * k3.dP1 + k4.dP1) / 6.0;
    combo.dP2 = (k1.dP2 + 2.0 * k2.dP2 + 2.0 * k3.dP2 + k4.dP2) / 6.0;
    combo.dphi = (k1.dphi + 2.0 * k2.dphi + 2.0 * k3.dphi + k4.dphi) / 6.0;
    combo.dpsi = (k1.dpsi + 2.0 * k2.dpsi + 2.0 * k3.dpsi + k4.dpsi) / 6.0;
    s = axpy(s, step, combo);

    check_node(m, s, grid[i - 1]);
    P1[i - 1] = s.P1; P2[i - 1] = s.P2; phi[i - 1] = s.phi; psi[i - 1] = s.psi;
  }

  return RiccatiSolution(std::move(grid), std::move(P1), std::move(P2),
                         std::move(phi), std::move(psi));
}

}  // namespace mflq
