#include "mflq/csv.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace mflq {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << std::setprecision(17);
  return out;
}

}  // namespace

void write_measure_csv(const std::string& path, const EmpiricalMeasure& mu) {
  auto out = open_out(path);
  for (int j = 0; j < mu.dim(); ++j) out << (j ? "," : "") << "x" << (j + 1);
  out << "\n";
  for (int i = 0; i < mu.size(); ++i) {
    for (int j = 0; j < mu.dim(); ++j) out << (j ? "," : "") << mu.samples()(i, j);
    out << "\n";
  }
}

EmpiricalMeasure read_measure_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("x1", 0) != 0) {
    throw std::runtime_error("measure CSV missing x1..xn header: " + path);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("measure CSV has no samples: " + path);
  Eigen::MatrixXd samples(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw std::runtime_error("measure CSV has ragged rows: " + path);
    }
    for (size_t j = 0; j < rows[i].size(); ++j) samples(i, j) = rows[i][j];
  }
  return EmpiricalMeasure(std::move(samples));
}

void write_riccati_csv(const std::string& path, const RiccatiSolution& sol) {
  auto out = open_out(path);
  const int n = static_cast<int>(sol.P1_node(0).rows());
  out << "t";
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out << ",P1_" << (i + 1) << (j + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) out << ",P2_" << (i + 1) << (j + 1);
  for (int i = 0; i < n; ++i) out << ",phi_" << (i + 1);
  out << ",psi\n";
  for (int m = 0; m < sol.nodes(); ++m) {
    out << sol.time_at(m);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out << "," << sol.P1_node(m)(i, j);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out << "," << sol.P2_node(m)(i, j);
    for (int i = 0; i < n; ++i) out << "," << sol.phi_node(m)(i);
    out << "," << sol.psi_node(m) << "\n";
  }
}

void write_ensemble_csv(const std::string& path, const ParticleEnsemble& ens) {
  auto out = open_out(path);
  out << "t,particle_id";
  for (int j = 0; j < ens.dim(); ++j) out << ",x" << (j + 1);
  out << "\n";
  for (size_t m = 0; m < ens.states.size(); ++m) {
    for (int i = 0; i < ens.particles(); ++i) {
      out << ens.path.times[m] << "," << i;
      for (int j = 0; j < ens.dim(); ++j) out << "," << ens.states[m](i, j);
      out << "\n";
    }
  }
}

void write_path_csv(const std::string& path, const CommonNoisePath& p) {
  auto out = open_out(path);
  out << "t,dW\n";
  for (int m = 0; m < p.steps(); ++m) {
    out << p.times[m] << "," << p.increments(m) << "\n";
  }
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << "t,V,residual,n_samples\n";
  for (const auto& r : rows) {
    out << r.t << "," << r.value << "," << r.residual << "," << r.n_samples << "\n";
  }
}

void write_bsde_csv(const std::string& path, const BsdeSolution& sol) {
  auto out = open_out(path);
  out << "t,Y_mean,Y_stderr,Z_mean\n";
  const int P = static_cast<int>(sol.Y.rows());
  for (size_t m = 0; m < sol.times.size(); ++m) {
    const double ym = sol.Y.col(m).mean();
    const double ys = std::sqrt((sol.Y.col(m).array() - ym).square().sum() /
                                std::max(P - 1, 1)) /
                      std::sqrt(static_cast<double>(P));
    const double zm = m + 1 < sol.times.size() ? sol.Z.col(m).mean() : 0.0;
    out << sol.times[m] << "," << ym << "," << ys << "," << zm << "\n";
  }
}

void write_reports_csv(const std::string& path,
                       const std::vector<CheckReport>& reports) {
  auto out = open_out(path);
  out << "check,statistic,tolerance,stderr,one_sided,pass,details\n";
  for (const auto& r : reports) {
    std::string details = r.details;
    for (auto& ch : details) {
      if (ch == ',') ch = ';';
    }
    out << r.name << "," << r.statistic << "," << r.tolerance << ","
        << r.stderr_ << "," << (r.one_sided ? 1 : 0) << ","
        << (r.pass ? 1 : 0) << "," << details << "\n";
  }
}

void write_reports_text(const std::string& path,
                        const std::vector<CheckReport>& reports) {
  auto out = open_out(path);
  out << std::setprecision(6);
  for (const auto& r : reports) {
    out << (r.pass ? "PASS" : "FAIL") << "  " << r.name
        << "  statistic=" << r.statistic << "  tolerance=" << r.tolerance
        << "\n      " << r.details << "\n";
  }
}

}  // namespace mflq
