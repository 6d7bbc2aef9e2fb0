#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "slowman/config.hpp"

using namespace slowman;

TEST_CASE("defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.model == "ei");
  CHECK(c.L == 9);
  CHECK(c.cycle.grid_N == 4096);
  CHECK(c.representation == Representation::real);
  CHECK(c.accuracy.tolerances == std::vector<double>{1e-6, 1e-8});
  CHECK(c.samples.seed == 0);
  CHECK(c.samples.count == 50);
}

TEST_CASE("sections, comments and lists") {
  const char* text = R"(# leading comment
model = oracle
L = 5
representation = complex
tolerances = 1e-5, 1e-7, 1e-9
; another comment style

[cycle]
grid_N = 256
guess = 1.5, 0.25
[integrator]
rtol = 1e-10
[bundle]
scale = 2.5
[resonance]
inject_exponents = -0.5, -1:0.25
[thresholds]
directional = 3e-7
)";
  const RunConfig c = parse_config(text);
  CHECK(c.model == "oracle");
  CHECK(c.L == 5);
  CHECK(c.representation == Representation::complex);
  CHECK(c.accuracy.tolerances == std::vector<double>{1e-5, 1e-7, 1e-9});
  CHECK(c.cycle.grid_N == 256);
  CHECK(c.cycle.guess == std::vector<double>{1.5, 0.25});
  CHECK(c.integrator.rtol == 1e-10);
  CHECK(c.bundle_scale == std::vector<double>{2.5});
  REQUIRE(c.inject_exponents.size() == 2);
  CHECK(c.inject_exponents[1] == cplx(-1.0, 0.25));
  CHECK(c.thresholds.directional == 3e-7);
}

TEST_CASE("model parameters") {
  const RunConfig c = parse_config("[params]\nJ_ei = 14.5\nI_e_ext = 9\n");
  CHECK(c.params.at("J_ei") == 14.5);
  CHECK(c.params.at("I_e_ext") == 9.0);
  CHECK(c.echo().at("params.J_ei") == "14.5");
}

TEST_CASE("invalid input is rejected") {
  CHECK_THROWS_AS(parse_config("colour = red\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[cycle]\nspeed = 1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("L = five\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("L = 0\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("L = -2\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[cycle]\ngrid_N = 1000\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("tolerances = 1e-8, 1e-6\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("representation = polar\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[floquet]\nsegments = 48\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[bundle]\nscale = 1, 0\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[validation]\nexpand = maybe\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[cycle\n"), InvalidArgument);
  CHECK_THROWS_AS(load_config("/nonexistent/run.conf"), IoError);
}

TEST_CASE("overrides win over the text") {
  const RunConfig c = parse_config("L = 5\n[cycle]\ngrid_N = 512\n", {{"L", "7"}, {"cycle.grid_N", "1024"}});
  CHECK(c.L == 7);
  CHECK(c.cycle.grid_N == 1024);
}

TEST_CASE("environment overrides") {
  CHECK(env_name("cycle.grid_N") == "SSM_CYCLE_GRID_N");
  CHECK(env_name("L") == "SSM_L");
  const auto path = std::filesystem::temp_directory_path() / "slowman_env_test.conf";
  {
    std::ofstream f(path);
    f << "model = oracle\nL = 5\n[cycle]\ngrid_N = 256\n";
  }
  ::setenv("SSM_L", "4", 1);
  ::setenv("SSM_CYCLE_GRID_N", "128", 1);
  ::setenv("SSM_SEED", "17", 1);
  const RunConfig c = load_config(path);
  ::unsetenv("SSM_L");
  ::unsetenv("SSM_CYCLE_GRID_N");
  ::unsetenv("SSM_SEED");
  CHECK(c.L == 4);
  CHECK(c.cycle.grid_N == 128);
  CHECK(c.samples.seed == 17);

  ::setenv("SSM_PARAMS_J_ei", "13", 1);
  const auto env = environment_overrides();
  ::unsetenv("SSM_PARAMS_J_ei");
  CHECK(env.at("params.J_ei") == "13");
  std::filesystem::remove(path);
}

TEST_CASE("echo round trips through the parser") {
  RunConfig c = parse_config("model = oracle\nL = 5\n[cycle]\ngrid_N = 256\n[integrator]\nrtol = 1.25e-11\n");
  const auto echo = c.echo();
  std::map<std::string, std::string> all(echo.begin(), echo.end());
  const RunConfig d = parse_config("", all);
  CHECK(d.echo() == echo);
  CHECK(d.integrator.rtol == 1.25e-11);
  for (const auto& k : config_keys()) CHECK(echo.count(k) == 1);
}
