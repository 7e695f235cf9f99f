#pragma once

#include <Eigen/Core>
#include <vector>

#include "mflq/model.hpp"

namespace mflq {

/// The five coefficient maps entering the control-dependent part of the
/// generator equation:
///   Pi1 = D'P1 D + R,  Pi2 = D'P2 D + R,
///   Pi3 = C'P1 D + P1 (B + beta D),
///   Pi4 = (C+Cbar)'P2 D + P2 (B + beta D),
///   Pi5 = (B + beta D)' phi.
struct PiCoefficients {
  Eigen::MatrixXd pi1, pi2;  // k x k
  Eigen::MatrixXd pi3, pi4;  // n x k
  Eigen::VectorXd pi5;       // k
};

PiCoefficients pi_coefficients(const LQModel& model, const Eigen::MatrixXd& P1,
                               const Eigen::MatrixXd& P2,
                               const Eigen::VectorXd& phi);

/// Time derivatives of (P1, P2, phi, psi) along the backward system,
/// evaluated at a given state. These are the analytic right-hand sides;
/// the residual evaluation consumes them directly.
struct RiccatiDerivatives {
  Eigen::MatrixXd dP1, dP2;
  Eigen::VectorXd dphi;
  double dpsi;
};

RiccatiDerivatives riccati_rhs(const LQModel& model, const Eigen::MatrixXd& P1,
                               const Eigen::MatrixXd& P2,
                               const Eigen::VectorXd& phi);

/// Time-gridded solution (P1, P2, phi, psi) of the backward system with
/// terminal data (G, G+Gbar, 0, 0). Piecewise-linear in t between nodes.
/// Immutable after construction.
class RiccatiSolution {
 public:
  RiccatiSolution(std::vector<double> grid, std::vector<Eigen::MatrixXd> P1,
                  std::vector<Eigen::MatrixXd> P2,
                  std::vector<Eigen::VectorXd> phi, std::vector<double> psi);

  int nodes() const { return static_cast<int>(grid_.size()); }
  double time_at(int i) const { return grid_[i]; }
  double horizon() const { return grid_.back(); }

  const Eigen::MatrixXd& P1_node(int i) const { return P1_[i]; }
  const Eigen::MatrixXd& P2_node(int i) const { return P2_[i]; }
  const Eigen::VectorXd& phi_node(int i) const { return phi_[i]; }
  double psi_node(int i) const { return psi_[i]; }

  Eigen::MatrixXd P1_at(double t) const;
  Eigen::MatrixXd P2_at(double t) const;
  Eigen::VectorXd phi_at(double t) const;
  double psi_at(double t) const;

 private:
  std::pair<int, double> locate(double t) const;

  std::vector<double> grid_;
  std::vector<Eigen::MatrixXd> P1_, P2_;
  std::vector<Eigen::VectorXd> phi_;
  std::vector<double> psi_;
};

// Fixed-step classical RK4, integrated backward from t = T on a uniform grid
// of `steps` intervals. P1, P2 are re-symmetrized after every stage; Pi1 and
// Pi2 are checked positive definite at every node (throws with the first
// failing time otherwise).
RiccatiSolution solve_riccati(const LQModel& model, int steps);

}  // namespace mflq
