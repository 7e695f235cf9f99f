#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mflq/config.hpp"
#include "oracles.hpp"

using namespace mflq;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const auto dir = std::filesystem::temp_directory_path() / "mflq_config_tests";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / name).string();
  std::ofstream out(path);
  out << body;
  return path;
}

const char* kScalarConfig = R"(# scalar model, all features on
model.n = 1
model.k = 1
model.A = [0.3]
model.Abar = [0.2]
model.B = [1.0]
model.C = [0.2]
model.Cbar = [0.1]
model.D = [0.3]
model.Q = [1.0]
model.Qbar = [0.5]
model.R = [1.0]
model.G = [1.0]
model.Gbar = [0.5]
model.beta = 0.25
model.T = 1.0
init.mean = [0.5]
init.cov = [1.0]
grids.sde_steps = 120   # inline comment
seeds.master = 99
)";

}  // namespace

TEST_CASE("parse + build: full scalar file") {
  const std::string path = write_temp("scalar.cfg", kScalarConfig);
  const ExperimentConfig cfg = build_config(parse_config_file(path), {});
  CHECK(cfg.model.n() == 1);
  CHECK(cfg.model.k() == 1);
  CHECK(cfg.model.A(0, 0) == 0.3);
  CHECK(cfg.model.beta == 0.25);
  CHECK(cfg.model.T == 1.0);
  CHECK(cfg.init_mean(0) == 0.5);
  CHECK(cfg.init_cov(0, 0) == 1.0);
  CHECK(cfg.sde_steps == 120);       // file value
  CHECK(cfg.riccati_steps == 2000);  // default
  CHECK(cfg.seed == 99);
  CHECK(cfg.checks.empty());         // all checks
  CHECK(cfg.out_dir == "out");
}

TEST_CASE("overrides win over file values") {
  const std::string path = write_temp("scalar2.cfg", kScalarConfig);
  KeyValues ov;
  ov["seeds.master"] = "7";
  ov["grids.particles"] = "500";
  ov["model.beta"] = "0.0";
  const ExperimentConfig cfg = build_config(parse_config_file(path), ov);
  CHECK(cfg.seed == 7);
  CHECK(cfg.particles == 500);
  CHECK(cfg.model.beta == 0.0);
}

TEST_CASE("missing required field is named in the error") {
  std::string body = kScalarConfig;
  const auto pos = body.find("model.R = [1.0]\n");
  REQUIRE(pos != std::string::npos);
  body.erase(pos, std::string("model.R = [1.0]\n").size());
  const std::string path = write_temp("missing_r.cfg", body);
  try {
    build_config(parse_config_file(path), {});
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("model.R") != std::string::npos);
  }
}

TEST_CASE("malformed inputs are rejected") {
  const std::string path = write_temp("scalar3.cfg", kScalarConfig);
  const KeyValues file = parse_config_file(path);

  KeyValues bad = file;
  bad["model.beta"] = "fast";
  CHECK_THROWS_AS(build_config(bad, {}), ConfigError);

  bad = file;
  bad["model.A"] = "[1 2]";  // wrong entry count for 1x1
  CHECK_THROWS_AS(build_config(bad, {}), ConfigError);

  bad = file;
  bad["model.A"] = "1.0";  // no brackets
  CHECK_THROWS_AS(build_config(bad, {}), ConfigError);

  bad = file;
  bad["grids.paths"] = "2.5";
  CHECK_THROWS_AS(build_config(bad, {}), ConfigError);

  bad = file;
  bad["grids.paths"] = "-3";
  CHECK_THROWS_AS(build_config(bad, {}), ConfigError);

  bad = file;
  bad["model.R"] = "[-1.0]";  // violates R >= delta_pd I
  CHECK_THROWS_AS(build_config(bad, {}), ConfigError);
}

TEST_CASE("parser rejects bad lines and unknown file") {
  CHECK_THROWS_AS(parse_config_file("/nonexistent/nowhere.cfg"), ConfigError);
  const std::string p1 = write_temp("noeq.cfg", "model.n 1\n");
  CHECK_THROWS_AS(parse_config_file(p1), ConfigError);
  const std::string p2 = write_temp("nosection.cfg", "n = 1\n");
  CHECK_THROWS_AS(parse_config_file(p2), ConfigError);
}

TEST_CASE("checks.select splits on commas") {
  const std::string path = write_temp("scalar4.cfg", kScalarConfig);
  KeyValues ov;
  ov["checks.select"] = "value_cost, dpp_residual";
  const ExperimentConfig cfg = build_config(parse_config_file(path), ov);
  REQUIRE(cfg.checks.size() == 2);
  CHECK(cfg.checks[0] == "value_cost");
  CHECK(cfg.checks[1] == "dpp_residual");

  ov["checks.select"] = "all";
  CHECK(build_config(parse_config_file(path), ov).checks.empty());
}

TEST_CASE("default config is valid and manifest round-trips through the parser") {
  ExperimentConfig cfg = default_config();
  CHECK_NOTHROW(cfg.model.validate());

  const std::string path = write_temp("manifest.cfg", cfg.to_manifest());
  const ExperimentConfig back = build_config(parse_config_file(path), {});
  CHECK(oracles::bitwise_equal(back.model.A, cfg.model.A));
  CHECK(oracles::bitwise_equal(back.model.R, cfg.model.R));
  CHECK(back.model.beta == cfg.model.beta);
  CHECK(back.seed == cfg.seed);
  CHECK(back.sde_steps == cfg.sde_steps);
}
