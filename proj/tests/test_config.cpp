#include <cmath>
#include <numbers>

#include "doctest.h"
#include "raman/config.hpp"
#include "raman/error.hpp"

using namespace raman;

TEST_CASE("defaults reproduce the experimental parameter table") {
  const RunConfig c;
  CHECK(c.system.lambda_write_stokes == 0.104);
  CHECK(c.system.lambda_read_antistokes == 0.136);
  CHECK(c.system.theta == doctest::Approx(std::numbers::pi / 6));
  CHECK(c.system.n_th == 0.04);
  CHECK(c.system.phonons[0].beta == doctest::Approx(std::sqrt(1.0 / 3.0)));
  CHECK(c.system.phonons[0].tau_ps() == doctest::Approx(8.4));
  CHECK(c.system.phonons[1].tau_ps() == doctest::Approx(1.7));
  CHECK(c.detectors.eta_stokes == 0.1);
  CHECK(c.detectors.eta_antistokes == 0.1);
  CHECK(c.detectors.pdc_stokes == 2e-4);
  CHECK(c.detectors.pdc_antistokes == 1e-5);
  REQUIRE(c.delays_ps.size() == 98);
  CHECK(c.delays_ps.front() == doctest::Approx(0.3));
  CHECK(c.delays_ps.back() == doctest::Approx(10.0));
  CHECK(c.dims == std::array<int, 4>{3, 3, 3, 3});
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("config table syntax") {
  const ConfigTable t = parse_config_table(
      "# comment\n[system]\nn_th = 0.05   # trailing\n[output]\ndir = \"a # b\"\nsvg = false\n"
      "[sweep]\ndelays_ps = [0.5, 1.0, 2]\n");
  CHECK(std::get<double>(t.values.at("system.n_th")) == 0.05);
  CHECK(std::get<std::string>(t.values.at("output.dir")) == "a # b");
  CHECK(std::get<bool>(t.values.at("output.svg")) == false);
  CHECK(std::get<std::vector<double>>(t.values.at("sweep.delays_ps")).size() == 3);
  CHECK(t.lines.at("output.svg") == 6);
}

TEST_CASE("config syntax errors cite the line") {
  try {
    parse_config_table("[system]\nn_th = 0.04\ntheta_rad 0.5\n", "run.toml");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("run.toml:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_table("[system\n"), ParseError);
  CHECK_THROWS_AS(parse_config_table("[a]\nx = 1\nx = 2\n"), ParseError);
  CHECK_THROWS_AS(parse_config_table("x = [1, 2\n"), ParseError);
  CHECK_THROWS_AS(parse_config_table("x = 1.2.3\n"), ParseError);
}

TEST_CASE("run config keys") {
  const RunConfig c = parse_run_config(R"(
[system]
lambda_fwm_per_ps = 0.02
theta_rad = 0.0
beta1 = 0.6
tau1_ps = 9.0
beat_ghz = 250
[detectors]
eta_stokes = 0.2
[sweep]
start_ps = 1.0
stop_ps = 2.0
step_ps = 0.5
[integrator]
method = "rk4"
fixed_step_ps = 0.002
[truncation]
dims = [4, 4, 3, 3]
[output]
dir = "results"
svg = false
)");
  CHECK(c.system.lambda_fwm == 0.02);
  CHECK(c.system.theta == 0.0);
  CHECK(c.system.phonons[0].beta == 0.6);
  CHECK(c.system.phonons[1].beta == doctest::Approx(0.8));
  CHECK(c.system.phonons[0].kappa == doctest::Approx(1.0 / 9.0));
  CHECK(c.system.phonons[0].delta - c.system.phonons[1].delta == doctest::Approx(2 * std::numbers::pi * 0.25));
  CHECK(c.detectors.eta_stokes == 0.2);
  CHECK(c.delays_ps == std::vector<double>{1.0, 1.5, 2.0});
  CHECK(c.integrator.method == IntegrationMethod::rk4);
  CHECK(c.dims == std::array<int, 4>{4, 4, 3, 3});
  CHECK(c.output.dir == "results");
  CHECK_FALSE(c.output.svg);
}

TEST_CASE("invalid configurations are rejected before computing") {
  CHECK_THROWS_AS(parse_run_config("[system]\nunknown_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[system]\nbeta1 = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[system]\ntau2_ps = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[detectors]\neta_stokes = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[detectors]\npdc_stokes = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[integrator]\nmethod = \"euler\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[integrator]\nrel_tol = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[truncation]\ndim = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[truncation]\ndims = [3, 3]\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[sweep]\ndelays_ps = [-1.0]\n"), ConfigError);
  CHECK_THROWS_AS(parse_run_config("[system]\nn_th = \"warm\"\n"), ConfigError);
  try {
    parse_run_config("\n\n[system]\nn_th = -0.1\n", "bad.toml");
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("n_th") != std::string::npos);
  }
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.toml"), ConfigError);
}

TEST_CASE("formatted config round-trips") {
  RunConfig c;
  c.system.theta = 0.3;
  c.system.lambda_fwm = 0.01;
  c.system.phonons[0].beta = 0.6;
  c.system.phonons[1].beta = 0.8;
  c.detectors.pdc_antistokes = 3e-5;
  c.delays_ps = {0.4, 0.9};
  c.integrator.analytic_gaps = false;
  c.dims = {4, 3, 3, 2};
  c.output.dir = "x/y";
  const RunConfig back = parse_run_config(format_run_config(c));
  CHECK(back.system.theta == c.system.theta);
  CHECK(back.system.lambda_fwm == c.system.lambda_fwm);
  CHECK(back.system.phonons[1].beta == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(back.system.phonons[0].delta == doctest::Approx(c.system.phonons[0].delta).epsilon(1e-12));
  CHECK(back.detectors.pdc_antistokes == c.detectors.pdc_antistokes);
  CHECK(back.delays_ps == c.delays_ps);
  CHECK(back.integrator.analytic_gaps == false);
  CHECK(back.dims == c.dims);
  CHECK(back.output.dir == c.output.dir);
}
