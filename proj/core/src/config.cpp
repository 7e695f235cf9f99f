#include "mflq/config.hpp"

#include <fstream>
#include <sstream>

namespace mflq {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

class Fields {
 public:
  Fields(const KeyValues& file, const KeyValues& overrides) : kv_(file) {
    for (const auto& [k, v] : overrides) kv_[k] = v;
  }

  bool has(const std::string& key) const { return kv_.count(key) > 0; }

  std::string raw(const std::string& key) const {
    auto it = kv_.find(key);
    if (it == kv_.end()) throw ConfigError("missing required field: " + key);
    return it->second;
  }

  double number(const std::string& key) const {
    try {
      size_t pos = 0;
      const std::string v = raw(key);
      const double x = std::stod(v, &pos);
      if (trim(v.substr(pos)).size()) throw std::invalid_argument("");
      return x;
    } catch (const ConfigError&) {
      throw;
    } catch (...) {
      throw ConfigError("field is not a number: " + key);
    }
  }

  double number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
  }

  long integer(const std::string& key) const {
    const double x = number(key);
    const long i = static_cast<long>(x);
    if (static_cast<double>(i) != x) throw ConfigError("field is not an integer: " + key);
    return i;
  }

  long integer_or(const std::string& key, long fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  // Bracketed row-major list, e.g. [1 0 0 1] for a 2x2 matrix.
  Eigen::MatrixXd matrix(const std::string& key, int rows, int cols) const {
    std::string v = trim(raw(key));
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
      throw ConfigError("field is not a bracketed matrix: " + key);
    }
    std::stringstream ss(v.substr(1, v.size() - 2));
    std::vector<double> entries;
    double x;
    while (ss >> x) entries.push_back(x);
    if (static_cast<int>(entries.size()) != rows * cols) {
      throw ConfigError("field " + key + " needs " + std::to_string(rows * cols) +
                        " entries, got " + std::to_string(entries.size()));
    }
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) M(i, j) = entries[i * cols + j];
    return M;
  }

 private:
  KeyValues kv_;
};

std::string matrix_text(const Eigen::MatrixXd& M) {
  std::ostringstream os;
  os << "[";
  for (int i = 0; i < M.rows(); ++i)
    for (int j = 0; j < M.cols(); ++j)
      os << (i + j ? " " : "") << M(i, j);
  os << "]";
  return os.str();
}

}  // namespace

KeyValues parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  KeyValues kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        " is not 'section.key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.find('.') == std::string::npos) {
      throw ConfigError("config key missing section prefix: " + key);
    }
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

ExperimentConfig build_config(const KeyValues& file_values,
                              const KeyValues& overrides) {
  const Fields f(file_values, overrides);
  ExperimentConfig cfg;

  const int n = static_cast<int>(f.integer("model.n"));
  const int k = static_cast<int>(f.integer("model.k"));
  if (n < 1) throw ConfigError("model.n must be >= 1");
  if (k < 1) throw ConfigError("model.k must be >= 1");

  cfg.model.A = f.matrix("model.A", n, n);
  cfg.model.Abar = f.matrix("model.Abar", n, n);
  cfg.model.B = f.matrix("model.B", n, k);
  cfg.model.C = f.matrix("model.C", n, n);
  cfg.model.Cbar = f.matrix("model.Cbar", n, n);
  cfg.model.D = f.matrix("model.D", n, k);
  cfg.model.Q = f.matrix("model.Q", n, n);
  cfg.model.Qbar = f.matrix("model.Qbar", n, n);
  cfg.model.R = f.matrix("model.R", k, k);
  cfg.model.G = f.matrix("model.G", n, n);
  cfg.model.Gbar = f.matrix("model.Gbar", n, n);
  cfg.model.beta = f.number("model.beta");
  cfg.model.T = f.number("model.T");
  cfg.model.delta_pd = f.number_or("model.delta_pd", 1e-8);
  try {
    cfg.model.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model validation failed: ") + e.what());
  }

  cfg.init_mean = f.has("init.mean") ? Eigen::VectorXd(f.matrix("init.mean", n, 1))
                                     : Eigen::VectorXd::Zero(n);
  cfg.init_cov = f.has("init.cov") ? f.matrix("init.cov", n, n)
                                   : Eigen::MatrixXd::Identity(n, n);

  cfg.riccati_steps = static_cast<int>(f.integer_or("grids.riccati_steps", 2000));
  cfg.sde_steps = static_cast<int>(f.integer_or("grids.sde_steps", 200));
  cfg.particles = static_cast<int>(f.integer_or("grids.particles", 2000));
  cfg.paths = static_cast<int>(f.integer_or("grids.paths", 200));
  for (const char* key : {"grids.riccati_steps", "grids.sde_steps",
                          "grids.particles", "grids.paths"}) {
    if (f.integer_or(key, 1) < 1) throw ConfigError(std::string(key) + " must be positive");
  }
  cfg.seed = static_cast<std::uint64_t>(f.integer_or("seeds.master", 42));

  if (f.has("checks.select") && f.raw("checks.select") != "all") {
    std::stringstream ss(f.raw("checks.select"));
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (!item.empty()) cfg.checks.push_back(item);
    }
  }
  if (f.has("output.dir")) cfg.out_dir = f.raw("output.dir");
  return cfg;
}

ExperimentConfig default_config() {
  ExperimentConfig cfg;
  cfg.model = LQModel::scalar(/*a=*/0.3, /*abar=*/0.2, /*b=*/1.0, /*c=*/0.2,
                              /*cbar=*/0.1, /*d=*/0.3, /*q=*/1.0, /*qbar=*/0.5,
                              /*r=*/1.0, /*g=*/1.0, /*gbar=*/0.5,
                              /*beta=*/0.25, /*T=*/1.0);
  cfg.init_mean = Eigen::VectorXd::Constant(1, 0.5);
  cfg.init_cov = Eigen::MatrixXd::Identity(1, 1);
  return cfg;
}

std::string ExperimentConfig::to_manifest() const {
  std::ostringstream os;
  os << "model.n = " << model.n() << "\n";
  os << "model.k = " << model.k() << "\n";
  os << "model.A = " << matrix_text(model.A) << "\n";
  os << "model.Abar = " << matrix_text(model.Abar) << "\n";
  os << "model.B = " << matrix_text(model.B) << "\n";
  os << "model.C = " << matrix_text(model.C) << "\n";
  os << "model.Cbar = " << matrix_text(model.Cbar) << "\n";
  os << "model.D = " << matrix_text(model.D) << "\n";
  os << "model.Q = " << matrix_text(model.Q) << "\n";
  os << "model.Qbar = " << matrix_text(model.Qbar) << "\n";
  os << "model.R = " << matrix_text(model.R) << "\n";
  os << "model.G = " << matrix_text(model.G) << "\n";
  os << "model.Gbar = " << matrix_text(model.Gbar) << "\n";
  os << "model.beta = " << model.beta << "\n";
  os << "model.T = " << model.T << "\n";
  os << "init.mean = " << matrix_text(init_mean) << "\n";
  os << "init.cov = " << matrix_text(init_cov) << "\n";
  os << "grids.riccati_steps = " << riccati_steps << "\n";
  os << "grids.sde_steps = " << sde_steps << "\n";
  os << "grids.particles = " << particles << "\n";
  os << "grids.paths = " << paths << "\n";
  os << "seeds.master = " << seed << "\n";
  os << "output.dir = " << out_dir << "\n";
  return os.str();
}

}  // namespace mflq
