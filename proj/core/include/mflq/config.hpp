#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "mflq/model.hpp"

namespace mflq {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Configuration for one experiment run. Parsed from a line-oriented
/// `section.key = value` file; matrices are row-major bracketed lists.
struct ExperimentConfig {
  LQModel model;
  Eigen::VectorXd init_mean;  // Gaussian initial-cloud parameters
  Eigen::MatrixXd init_cov;

  int riccati_steps = 2000;
  int sde_steps = 200;
  int particles = 2000;
  int paths = 200;
  std::uint64_t seed = 42;
  std::vector<std::string> checks;  // empty = all
  std::string out_dir = "out";

  // Canonical textual form (for the run manifest).
  std::string to_manifest() const;
};

// Raw key/value view of a config source, before typing.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_config_file(const std::string& path);

// `overrides` win over file values. Throws ConfigError naming the first
// missing or malformed field.
ExperimentConfig build_config(const KeyValues& file_values,
                              const KeyValues& overrides);

// Shipped default: a scalar model with every feature active.
ExperimentConfig default_config();

}  // namespace mflq
