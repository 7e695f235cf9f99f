#pragma once

#include <string>
#include <vector>

#include "mflq/bsde.hpp"
#include "mflq/measure.hpp"
#include "mflq/riccati.hpp"
#include "mflq/sde.hpp"
#include "mflq/verify.hpp"

namespace mflq {

// Sample clouds: header x1..xn, one row per sample.
void write_measure_csv(const std::string& path, const EmpiricalMeasure& mu);
EmpiricalMeasure read_measure_csv(const std::string& path);

// Riccati grid: t, P1_ij (row-major), P2_ij, phi_i, psi.
void write_riccati_csv(const std::string& path, const RiccatiSolution& sol);

// Ensemble: t, particle_id, x1..xn. Path: t, dW.
void write_ensemble_csv(const std::string& path, const ParticleEnsemble& ens);
void write_path_csv(const std::string& path, const CommonNoisePath& p);

// Value / residual sweeps: t, V, residual, n_samples.
struct SweepRow {
  double t;
  double value;
  double residual;
  int n_samples;
};
void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

// Backward solutions: t, Y_mean, Y_stderr, Z_mean.
void write_bsde_csv(const std::string& path, const BsdeSolution& sol);

// Check reports: one row per check.
void write_reports_csv(const std::string& path,
                       const std::vector<CheckReport>& reports);
void write_reports_text(const std::string& path,
                        const std::vector<CheckReport>& reports);

}  // namespace mflq
