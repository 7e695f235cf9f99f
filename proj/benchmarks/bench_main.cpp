#include <benchmark/benchmark.h>

#include "mflq/measure.hpp"
#include "mflq/riccati.hpp"
#include "mflq/sde.hpp"
#include "mflq/value.hpp"

using namespace mflq;

static void BM_RiccatiSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const LQModel m = random_psd_model(n, std::max(1, n / 2), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_riccati(m, 500));
  }
}
BENCHMARK(BM_RiccatiSolve)->Arg(1)->Arg(3)->Arg(6);

static void BM_Wasserstein2(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const Eigen::MatrixXd a = gaussian_cloud(Eigen::VectorXd::Zero(2),
                                           Eigen::MatrixXd::Identity(2, 2), N, 1);
  const Eigen::MatrixXd b = gaussian_cloud(Eigen::VectorXd::Ones(2),
                                           Eigen::MatrixXd::Identity(2, 2), N, 2);
  const EmpiricalMeasure mu(a), nu(b);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wasserstein2(mu, nu));
  }
}
BENCHMARK(BM_Wasserstein2)->Arg(32)->Arg(128)->Arg(512);

static void BM_ParticleStep(benchmark::State& state) {
  const int N = static_cast<int>(state.range(0));
  const LQModel m = random_psd_model(2, 1, 11);
  const QuadraticValue qv(m, solve_riccati(m, 200));
  const Eigen::MatrixXd init = gaussian_cloud(Eigen::VectorXd::Zero(2),
                                              Eigen::MatrixXd::Identity(2, 2), N, 3);
  const CommonNoisePath path = generate_common_path(0.0, m.T, 100, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_lq_closed_loop(qv, init, path));
  }
}
BENCHMARK(BM_ParticleStep)->Arg(200)->Arg(2000);

BENCHMARK_MAIN();
