#pragma once
// Run configuration: a flat `key = value` file with optional [section]
// headers (a key `tol` under [resonance] is `resonance.tol`). Lines starting
// with '#' or ';' are comments. Every key can be overridden from the
// environment as SSM_<KEY> with dots replaced by underscores and letters
// upper-cased, e.g. SSM_CYCLE_GRID_N=1024.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "slowman/cycle.hpp"
#include "slowman/frames.hpp"
#include "slowman/validation.hpp"

namespace slowman {

/// Limits checked at the end of a run; any violation gives exit code 2.
struct Thresholds {
  double homological = 1e-9;
  double frame = 1e-9;
  double orthogonality = 1e-8;
  double conjugacy = 1e-6;
  double decay = 1e-6;
  double directional = 1e-7;
};

struct RunConfig {
  std::string model = "ei";
  std::map<std::string, double> params;
  IntegratorSettings integrator;
  CycleSettings cycle;
  FloquetSettings floquet;
  /// Psi^T Phi = Id is checked in extended precision at this tolerance on
  /// duality_points equally spaced times in (0, T].
  double duality_rtol = 1e-20;
  std::size_t duality_points = 16;
  std::size_t resonance_order = 9;
  double resonance_tol = 1e-8;
  /// Replaces the exponents lambda_1.. before the resonance check (testing).
  std::vector<cplx> inject_exponents;
  /// b_j for j = 1..d-1; empty means 1 for all.
  std::vector<double> bundle_scale;
  Representation representation = Representation::real;
  std::size_t L = 9;
  double small_divisor_tol = 1e-8;
  double solvability_tol = 1e-9;
  AccuracySettings accuracy;
  SampleSettings samples;
  TrajectorySettings trajectory;
  Thresholds thresholds;
  std::filesystem::path out = "out";

  void validate() const;
  /// Every key with its current value, in the file syntax.
  std::map<std::string, std::string> echo() const;
};

/// Keys understood by the parser, sorted.
std::vector<std::string> config_keys();

/// Environment variable consulted for a key.
std::string env_name(const std::string& key);

/// Parse text; keys in `overrides` win over the text. Unknown keys throw.
RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides = {});

/// Read a file and apply SSM_* environment overrides.
RunConfig load_config(const std::filesystem::path& path);

/// SSM_* variables currently set, keyed by config key.
std::map<std::string, std::string> environment_overrides();

}  // namespace slowman
