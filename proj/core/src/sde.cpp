#include "mflq/sde.hpp"

#include <Eigen/Cholesky>
#include <random>
#include <stdexcept>
#include <string>

namespace mflq {

Eigen::VectorXd CommonNoisePath::cumulative() const {
  Eigen::VectorXd w(steps() + 1);
  w(0) = 0.0;
  for (int m = 0; m < steps(); ++m) w(m + 1) = w(m) + increments(m);
  return w;
}

CommonNoisePath CommonNoisePath::tail(int m0, int m1) const {
  if (m0 < 0 || m1 > steps() || m0 >= m1) {
    throw std::invalid_argument("CommonNoisePath::tail: bad node range");
  }
  CommonNoisePath sub;
  sub.times.assign(times.begin() + m0, times.begin() + m1 + 1);
  sub.increments = increments.segment(m0, m1 - m0);
  sub.seed = seed;
  sub.step = step;
  return sub;
}

CommonNoisePath generate_common_path(double t0, double T, int steps,
                                     std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("generate_common_path: steps must be >= 1");
  if (!(T > t0)) throw std::invalid_argument("generate_common_path: need T > t0");
  CommonNoisePath p;
  p.seed = seed;
  const double h = (T - t0) / steps;
  p.step = h;
  p.times.resize(steps + 1);
  for (int m = 0; m <= steps; ++m) p.times[m] = t0 + m * h;
  p.times[steps] = T;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(h));
  p.increments.resize(steps);
  for (int m = 0; m < steps; ++m) p.increments(m) = normal(rng);
  return p;
}

EmpiricalMeasure ParticleEnsemble::measure_at(int m) const {
  if (m < 0 || m >= static_cast<int>(states.size())) {
    throw std::invalid_argument("measure_at: step index out of range");
  }
  return EmpiricalMeasure(states[m]);
}

namespace {

void check_finite(const Eigen::MatrixXd& X, int step) {
  if (!X.allFinite()) {
    throw std::runtime_error("simulation blow-up: nonfinite state at step " +
                             std::to_string(step));
  }
}

}  // namespace

ParticleEnsemble simulate_forward(const CoefficientSet& coeffs,
                                  const Eigen::MatrixXd& initial,
                                  const ParticlePolicy& policy,
                                  const CommonNoisePath& path) {
  const int N = static_cast<int>(initial.rows());
  const int n = static_cast<int>(initial.cols());
  if (N < 2) throw std::invalid_argument("simulate_forward: need N >= 2 particles");

  ParticleEnsemble ens;
  ens.path = path;
  ens.policy_name = "custom";
  ens.states.reserve(path.steps() + 1);
  ens.states.push_back(initial);

  const double h = path.h();
  for (int m = 0; m < path.steps(); ++m) {
    const Eigen::MatrixXd& X = ens.states.back();
    const EmpiricalMeasure mu(X);
    const double t = path.times[m];
    const double dW = path.increments(m);
    Eigen::MatrixXd Xn(N, n);
    for (int i = 0; i < N; ++i) {
      const Eigen::VectorXd xi = X.row(i).transpose();
      const Eigen::VectorXd ui = policy(t, xi, mu);
      Xn.row(i) = (xi + coeffs.drift(xi, mu, ui) * h +
                   coeffs.diffusion(xi, mu, ui) * dW).transpose();
    }
    check_finite(Xn, m + 1);
    ens.states.push_back(std::move(Xn));
  }
  return ens;
}

ParticleEnsemble simulate_lq(const LQModel& model, const LQPolicy& policy,
                             const Eigen::MatrixXd& initial,
                             const CommonNoisePath& path) {
  const int N = static_cast<int>(initial.rows());
  if (N < 2) throw std::invalid_argument("simulate_lq: need N >= 2 particles");
  if (initial.cols() != model.n()) {
    throw std::invalid_argument("simulate_lq: initial cloud dimension mismatch");
  }

  ParticleEnsemble ens;
  ens.path = path;
  ens.policy_name = "lq";
  ens.states.reserve(path.steps() + 1);
  ens.states.push_back(initial);

  const double h = path.h();
  const Eigen::MatrixXd At = model.A.transpose();
  const Eigen::MatrixXd Ct = model.C.transpose();
  const Eigen::MatrixXd Bt = model.B.transpose();
  const Eigen::MatrixXd Dt = model.D.transpose();

  for (int m = 0; m < path.steps(); ++m) {
    const Eigen::MatrixXd& X = ens.states.back();
    const Eigen::VectorXd mbar = X.colwise().mean().transpose();
    const Eigen::MatrixXd U = policy(path.times[m], X, mbar);
    const double dW = path.increments(m);

    Eigen::MatrixXd drift = X * At + U * Bt;
    drift.rowwise() += (model.Abar * mbar).transpose();
    Eigen::MatrixXd diff = X * Ct + U * Dt;
    diff.rowwise() += (model.Cbar * mbar).transpose();

    Eigen::MatrixXd Xn = X + h * drift + dW * diff;
    check_finite(Xn, m + 1);
    ens.states.push_back(std::move(Xn));
  }
  return ens;
}

LQPolicy closed_loop_policy(const QuadraticValue& qv) {
  return [&qv](double t, const Eigen::MatrixXd& X, const Eigen::VectorXd& mbar) {
    const LinearFeedback fb = qv.optimal_feedback(t);
    Eigen::MatrixXd U = (X.rowwise() - mbar.transpose()) * fb.K_dev.transpose();
    U.rowwise() += (fb.K_mean * mbar + fb.c).transpose();
    return U;
  };
}

ParticleEnsemble simulate_lq_closed_loop(const QuadraticValue& qv,
                                         const Eigen::MatrixXd& initial,
                                         const CommonNoisePath& path) {
  ParticleEnsemble ens = simulate_lq(qv.model(), closed_loop_policy(qv), initial, path);
  ens.policy_name = "closed_loop";
  return ens;
}

Eigen::MatrixXd conditional_mean_path(const QuadraticValue& qv,
                                      const Eigen::VectorXd& xbar0,
                                      const CommonNoisePath& path) {
  const LQModel& m = qv.model();
  const Eigen::MatrixXd Ac = m.A + m.Abar;
  const Eigen::MatrixXd Cc = m.C + m.Cbar;
  const double h = path.h();

  Eigen::MatrixXd out(path.steps() + 1, m.n());
  Eigen::VectorXd x = xbar0;
  out.row(0) = x.transpose();
  for (int s = 0; s < path.steps(); ++s) {
    const LinearFeedback fb = qv.optimal_feedback(path.times[s]);
    const Eigen::VectorXd ubar = fb.K_mean * x + fb.c;
    x = x + (Ac * x + m.B * ubar) * h + (Cc * x + m.D * ubar) * path.increments(s);
    if (!x.allFinite()) {
      throw std::runtime_error("conditional_mean_path: nonfinite values at step " +
                               std::to_string(s + 1));
    }
    out.row(s + 1) = x.transpose();
  }
  return out;
}

Eigen::MatrixXd gaussian_cloud(const Eigen::VectorXd& mean,
                               const Eigen::MatrixXd& cov, int count,
                               std::uint64_t seed) {
  const int n = static_cast<int>(mean.size());
  if (cov.rows() != n || cov.cols() != n) {
    throw std::invalid_argument("gaussian_cloud: covariance shape mismatch");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(cov + 1e-14 * Eigen::MatrixXd::Identity(n, n));
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("gaussian_cloud: covariance not positive semidefinite");
  }
  const Eigen::MatrixXd L = llt.matrixL();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd cloud(count, n);
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd z(n);
    for (int j = 0; j < n; ++j) z(j) = normal(rng);
    cloud.row(i) = (mean + L * z).transpose();
  }
  return cloud;
}

}  // namespace mflq
