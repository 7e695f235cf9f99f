#include "mflq/measure.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mflq {

EmpiricalMeasure::EmpiricalMeasure(Eigen::MatrixXd samples)
    : samples_(std::move(samples)) {
  if (samples_.rows() < 1 || samples_.cols() < 1) {
    throw std::invalid_argument("EmpiricalMeasure: need N >= 1 points in dimension n >= 1");
  }
  if (!samples_.allFinite()) {
    throw std::invalid_argument("EmpiricalMeasure: nonfinite sample entries");
  }
  order_.resize(samples_.rows());
  for (int i = 0; i < static_cast<int>(order_.size()); ++i) order_[i] = i;
  std::sort(order_.begin(), order_.end(), [this](int a, int b) {
    for (int j = 0; j < samples_.cols(); ++j) {
      if (samples_(a, j) != samples_(b, j)) return samples_(a, j) < samples_(b, j);
    }
    return false;
  });
}

Eigen::VectorXd EmpiricalMeasure::mean() const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim());
  for (int i : order_) acc += samples_.row(i).transpose();
  return acc / size();
}

double EmpiricalMeasure::quad_moment(const Eigen::MatrixXd& Pi) const {
  if (Pi.rows() != dim() || Pi.cols() != dim()) {
    throw std::invalid_argument("quad_moment: Pi dimension mismatch");
  }
  double acc = 0.0;
  for (int i : order_) {
    const Eigen::RowVectorXd xi = samples_.row(i);
    acc += (xi * Pi).dot(xi);
  }
  return acc / size();
}

double EmpiricalMeasure::variance_functional(const Eigen::MatrixXd& Pi) const {
  const Eigen::VectorXd m = mean();
  return quad_moment(Pi) - m.dot(Pi * m);
}

EmpiricalMeasure EmpiricalMeasure::translated(const Eigen::VectorXd& c) const {
  if (c.size() != dim()) throw std::invalid_argument("translated: dimension mismatch");
  Eigen::MatrixXd shifted = samples_;
  shifted.rowwise() += c.transpose();
  return EmpiricalMeasure(std::move(shifted));
}

EmpiricalMeasure EmpiricalMeasure::permuted(const std::vector<int>& perm) const {
  if (static_cast<int>(perm.size()) != size()) {
    throw std::invalid_argument("permuted: permutation length mismatch");
  }
  Eigen::MatrixXd out(size(), dim());
  for (int i = 0; i < size(); ++i) out.row(i) = samples_.row(perm[i]);
  return EmpiricalMeasure(std::move(out));
}

PushforwardStats pushforward_stats(const EmpiricalMeasure& mu,
                                   const ControlMap& u,
                                   const Eigen::MatrixXd& R) {
  const int N = mu.size();
  const int k = static_cast<int>(R.rows());
  if (R.cols() != k) throw std::invalid_argument("pushforward_stats: R not square");

  Eigen::MatrixXd img(N, k);
  for (int i = 0; i < N; ++i) {
    Eigen::VectorXd ui = u(mu.samples().row(i).transpose());
    if (ui.size() != k) {
      throw std::invalid_argument("pushforward_stats: control output dimension mismatch");
    }
    img.row(i) = ui.transpose();
  }
  EmpiricalMeasure image(std::move(img));
  PushforwardStats out;
  out.mean = image.mean();
  out.quad = image.quad_moment(R);
  out.var = image.variance_functional(R);
  return out;
}

double assignment_cost(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  if (cost.cols() != n) throw std::invalid_argument("assignment_cost: matrix not square");
  const double inf = std::numeric_limits<double>::infinity();

  // Shortest augmenting path with dual potentials (Jonker-Volgenant style).
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
        if (minv[j] < delta) { delta = minv[j]; j1 = j; }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
        else minv[j] -= delta;
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(p[j] - 1, j - 1);
  return total;
}

double wasserstein2(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                    int assignment_cap) {
  if (mu.dim() != nu.dim()) throw std::invalid_argument("wasserstein2: dimension mismatch");
  if (mu.size() != nu.size()) {
    throw std::invalid_argument("wasserstein2: sample counts differ (equal-size clouds only)");
  }
  const int N = mu.size();
  const int n = mu.dim();

  if (n == 1) {
    std::vector<double> a(N), b(N);
    for (int i = 0; i < N; ++i) { a[i] = mu.samples()(i, 0); b[i] = nu.samples()(i, 0); }
    std::stable_sort(a.begin(), a.end());
    std::stable_sort(b.begin(), b.end());
    double s = 0.0;
    for (int i = 0; i < N; ++i) { const double d = a[i] - b[i]; s += d * d; }
    return std::sqrt(s / N);
  }

  if (N > assignment_cap) {
    throw std::invalid_argument("wasserstein2: sample count exceeds exact-assignment cap");
  }
  Eigen::MatrixXd cost(N, N);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      cost(i, j) = (mu.samples().row(i) - nu.samples().row(j)).squaredNorm();
    }
  }
  return std::sqrt(assignment_cost(cost) / N);
}

}  // namespace mflq
