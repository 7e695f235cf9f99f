#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace mflq {

/// Coefficient bundle of the linear-quadratic mean-field problem:
/// dynamics dX = (A X + Abar E[X] + B u) dt + (C X + Cbar E[X] + D u) dW,
/// running cost x'Qx + E[x]'Qbar E[x] + u'Ru, terminal x'Gx + E[x]'Gbar E[x],
/// and the linear driver coefficient beta (scalar noise, d = 1).
struct LQModel {
  Eigen::MatrixXd A, Abar, C, Cbar;  // n x n
  Eigen::MatrixXd B, D;              // n x k
  Eigen::MatrixXd Q, Qbar, G, Gbar;  // symmetric n x n
  Eigen::MatrixXd R;                 // symmetric k x k, R >= delta_pd I
  double beta = 0.0;
  double T = 1.0;
  double delta_pd = 1e-8;

  int n() const { return static_cast<int>(A.rows()); }
  int k() const { return static_cast<int>(B.cols()); }

  // Checks shapes, symmetry (to 1e-12, then symmetrizes in place) and the
  // positivity conditions Q >= 0, Q+Qbar >= 0, G >= 0, G+Gbar >= 0,
  // R >= delta_pd I. Throws std::invalid_argument naming the offender.
  void validate();

  // Scalar shortcut: all coefficient blocks 1x1.
  static LQModel scalar(double a, double abar, double b, double c, double cbar,
                        double d, double q, double qbar, double r, double g,
                        double gbar, double beta, double T);

  static LQModel zero(int n, int k, double T = 1.0);
};

// Smallest eigenvalue of a symmetric matrix (dense eigendecomposition).
double min_eigenvalue(const Eigen::MatrixXd& S);

// Random model of dimensions n, k satisfying the positivity assumptions;
// coefficients moderate so short-horizon simulations stay well-conditioned.
// Deterministic in `seed`.
LQModel random_psd_model(int n, int k, std::uint64_t seed, double T = 1.0);

}  // namespace mflq
