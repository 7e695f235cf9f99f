#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace mflq {

/// Equal-weight sample cloud representing a square-integrable probability
/// measure on R^n. Immutable after construction; all functionals are pure.
class EmpiricalMeasure {
 public:
  // samples: one row per point, N x n, N >= 1.
  explicit EmpiricalMeasure(Eigen::MatrixXd samples);

  int size() const { return static_cast<int>(samples_.rows()); }
  int dim() const { return static_cast<int>(samples_.cols()); }
  const Eigen::MatrixXd& samples() const { return samples_; }

  Eigen::VectorXd mean() const;

  // mu_bar^2(Pi) = (1/N) sum_i x_i' Pi x_i, Pi symmetric n x n.
  double quad_moment(const Eigen::MatrixXd& Pi) const;

  // Var(mu)(Pi) = quad_moment(Pi) - mean' Pi mean.
  double variance_functional(const Eigen::MatrixXd& Pi) const;

  EmpiricalMeasure translated(const Eigen::VectorXd& c) const;
  EmpiricalMeasure permuted(const std::vector<int>& perm) const;

 private:
  Eigen::MatrixXd samples_;
  // Lexicographic row order; functionals accumulate in this order so that
  // their values are exactly invariant under sample permutation.
  std::vector<int> order_;
};

using ControlMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct PushforwardStats {
  Eigen::VectorXd mean;  // mean of u_# mu, length k
  double quad;           // (1/N) sum_i u(x_i)' R u(x_i)
  double var;            // Var(u_# mu)(R)
};

// Statistics of the image cloud {u(x_i)} under a symmetric k x k weight R.
PushforwardStats pushforward_stats(const EmpiricalMeasure& mu,
                                   const ControlMap& u,
                                   const Eigen::MatrixXd& R);

// Exact 2-Wasserstein distance between two equal-size equal-weight clouds.
// 1D: quantile coupling (sorted pairing). n >= 2: exact optimal assignment,
// refused above `assignment_cap` points.
double wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                    int assignment_cap = 512);

// Minimum-cost perfect matching value for a dense square cost matrix
// (shortest augmenting path, O(N^3)). Exposed for reuse and testing.
double assignment_cost(const Eigen::MatrixXd& cost);

}  // namespace mflq
