// Independent references used by the tests only. Everything here is computed
// by brute force or closed form, never through the library's own code path.
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

namespace oracles {

// Exact W2 between equal-size clouds by exhaustive search over pairings.
// Only sane for N <= 8.
inline double wasserstein2_bruteforce(const Eigen::MatrixXd& a,
                                      const Eigen::MatrixXd& b) {
  const int N = static_cast<int>(a.rows());
  std::vector<int> perm(N);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (int i = 0; i < N; ++i) s += (a.row(i) - b.row(perm[i])).squaredNorm();
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return std::sqrt(best / N);
}

// Closed-form solution of the scalar backward equation
//   p' = (b^2/r) p^2 - 2 a p - q,  p(T) = g,
// evaluated at time t <= T. Assumes q, g, r chosen so the solution exists on
// [0, T] (q >= 0, g >= 0, r > 0 suffice).
inline double scalar_riccati_closed_form(double t, double T, double a, double b,
                                         double q, double r, double g) {
  const double s = b * b / r;
  if (s == 0.0) {
    if (a == 0.0) return g + q * (T - t);
    const double e = std::exp(2.0 * a * (T - t));
    return g * e + q / (2.0 * a) * (e - 1.0);
  }
  const double disc = std::sqrt(a * a + s * q);
  const double lp = (a + disc) / s;
  const double lm = (a - disc) / s;
  // w = (p - lp)/(p - lm) evolves as w(t) = w(T) exp(2 disc (t - T)).
  const double wT = (g - lp) / (g - lm);
  const double w = wT * std::exp(2.0 * disc * (t - T));
  return (lp - lm * w) / (1.0 - w);
}

// Exact element-wise equality (no tolerance), shape included.
inline bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         (a.array() == b.array()).all();
}

// Random equal-weight cloud with entries in [-1, 1].
inline Eigen::MatrixXd random_cloud(int N, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd X(N, n);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < n; ++j) X(i, j) = unif(rng);
  return X;
}

inline Eigen::MatrixXd random_psd(int n, std::uint64_t seed, double scale = 1.0) {
  const Eigen::MatrixXd M = random_cloud(n, n, seed);
  return scale * M * M.transpose();
}

}  // namespace oracles
