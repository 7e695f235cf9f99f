#include "mflq/model.hpp"

#include <Eigen/Eigenvalues>
#include <random>
#include <stdexcept>
#include <string>

namespace mflq {

double min_eigenvalue(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace {

void require_shape(const Eigen::MatrixXd& M, int r, int c, const char* name) {
  if (M.rows() != r || M.cols() != c) {
    throw std::invalid_argument(std::string("LQModel: ") + name + " has wrong shape");
  }
}

void require_symmetric(Eigen::MatrixXd& S, const char* name) {
  const double asym = (S - S.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12) {
    throw std::invalid_argument(std::string("LQModel: ") + name + " not symmetric");
  }
  S = ((S + S.transpose()) / 2.0).eval();
}

void require_psd(const Eigen::MatrixXd& S, const char* name) {
  if (min_eigenvalue(S) < -1e-10) {
    throw std::invalid_argument(std::string("LQModel: ") + name + " not positive semidefinite");
  }
}

}  // namespace

void LQModel::validate() {
  const int nn = n();
  if (nn < 1) throw std::invalid_argument("LQModel: state dimension must be >= 1");
  const int kk = k();
  if (kk < 1) throw std::invalid_argument("LQModel: control dimension must be >= 1");
  require_shape(A, nn, nn, "A");
  require_shape(Abar, nn, nn, "Abar");
  require_shape(C, nn, nn, "C");
  require_shape(Cbar, nn, nn, "Cbar");
  require_shape(B, nn, kk, "B");
  require_shape(D, nn, kk, "D");
  require_shape(Q, nn, nn, "Q");
  require_shape(Qbar, nn, nn, "Qbar");
  require_shape(G, nn, nn, "G");
  require_shape(Gbar, nn, nn, "Gbar");
  require_shape(R, kk, kk, "R");
  require_symmetric(Q, "Q");
  require_symmetric(Qbar, "Qbar");
  require_symmetric(G, "G");
  require_symmetric(Gbar, "Gbar");
  require_symmetric(R, "R");
  require_psd(Q, "Q");
  require_psd(Q + Qbar, "Q+Qbar");
  require_psd(G, "G");
  require_psd(G + Gbar, "G+Gbar");
  if (min_eigenvalue(R) < delta_pd) {
    throw std::invalid_argument("LQModel: R not >= delta_pd * I");
  }
  if (!(T > 0.0)) throw std::invalid_argument("LQModel: T must be positive");
}

LQModel LQModel::scalar(double a, double abar, double b, double c, double cbar,
                        double d, double q, double qbar, double r, double g,
                        double gbar, double beta, double T) {
  LQModel m;
  auto s = [](double v) { return Eigen::MatrixXd::Constant(1, 1, v); };
  m.A = s(a); m.Abar = s(abar); m.B = s(b); m.C = s(c); m.Cbar = s(cbar);
  m.D = s(d); m.Q = s(q); m.Qbar = s(qbar); m.R = s(r); m.G = s(g); m.Gbar = s(gbar);
  m.beta = beta; m.T = T;
  m.validate();
  return m;
}

LQModel LQModel::zero(int n, int k, double T) {
  LQModel m;
  m.A = Eigen::MatrixXd::Zero(n, n); m.Abar = m.A; m.C = m.A; m.Cbar = m.A;
  m.B = Eigen::MatrixXd::Zero(n, k); m.D = m.B;
  m.Q = m.A; m.Qbar = m.A; m.G = m.A; m.Gbar = m.A;
  m.R = Eigen::MatrixXd::Identity(k, k);
  m.T = T;
  m.validate();
  return m;
}

LQModel random_psd_model(int n, int k, std::uint64_t seed, double T) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  auto rnd = [&](int r, int c) {
    Eigen::MatrixXd M(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) M(i, j) = unif(rng);
    return M;
  };
  auto psd = [&](int d, double scale) {
    Eigen::MatrixXd M = rnd(d, d);
    return Eigen::MatrixXd((scale * M * M.transpose()).eval());
  };
  LQModel m;
  m.A = rnd(n, n); m.Abar = 0.5 * rnd(n, n);
  m.C = 0.5 * rnd(n, n); m.Cbar = 0.25 * rnd(n, n);
  m.B = rnd(n, k); m.D = 0.5 * rnd(n, k);
  m.Q = psd(n, 1.0); m.Qbar = psd(n, 0.5);
  m.G = psd(n, 1.0); m.Gbar = psd(n, 0.5);
  m.R = psd(k, 0.5) + (0.5 + 0.5 * (unif(rng) + 0.5)) * Eigen::MatrixXd::Identity(k, k);
  m.beta = 0.4 * unif(rng);
  m.T = T;
  m.validate();
  return m;
}

}  // namespace mflq
