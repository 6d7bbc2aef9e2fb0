#pragma once
// Stage sequencing and artifact persistence. Each stage writes its results
// under the output directory; later stages reload them from there so a
// subcommand can pick up where an earlier invocation stopped.
//
// Layout of the output directory:
//   manifest.json                 config echo, stage summaries, checksums
//   cycle.json, cycle.csv         period, anchor, gamma on the grid
//   floquet.json                  multipliers, exponents, resonance report
//   frames/bundle.csv, frames/adjoint.csv
//   manifold/K_nn.csv, manifold/K_series_nn.csv
//   response/Z_nn.csv, response/I_nn.csv
//   validation/validation.json, validation/sigma_max.csv
//   plotdata/*.csv                (theta, sigma, component, value)

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "slowman/config.hpp"
#include "slowman/response.hpp"
#include "slowman/validation.hpp"

namespace slowman {

inline constexpr const char* tool_version = "0.4.0";

/// An exact resonance sum a_i lambda_i = lambda_k among the exponents.
class ResonanceError : public NumericalError {
 public:
  explicit ResonanceError(std::vector<ResonanceEntry> entries);
  const std::vector<ResonanceEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<ResonanceEntry> entries_;
};

/// Any failure inside a stage, tagged with the stage and the exit code the
/// CLI should return (3 numerical, 4 I/O, 1 bad input).
class StageError : public Error {
 public:
  StageError(std::string stage, int exit_code, const std::string& what);
  const std::string& stage() const noexcept { return stage_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  std::string stage_;
  int exit_code_;
};

enum class Command { run, cycle, floquet, manifold, response, validate, export_data };
std::string command_name(Command c);
Command parse_command(const std::string& s);

struct ValidationSummary {
  AccuracyDomain domain;
  std::vector<SlopeReport> slopes;  // per tolerance
  OrthogonalityReport orthogonality;
  std::vector<ManifoldSample> samples;
  TrajectoryReport trajectory;
  DirectionalReport directional;
  /// tolerance index used for samples (the smallest tolerance)
  std::size_t sample_tolerance = 0;
};

struct FrameSummary {
  FrameReport bundle;
  FrameReport adjoint;
  double biorthogonality = 0.0;
  double phase_normalization = 0.0;
  AdjointCrossCheck cross_check;
  /// |f(theta + 1) + f(theta)| per column of a period-2 frame (empty otherwise)
  std::vector<double> bundle_antiperiodicity;
  std::vector<double> adjoint_antiperiodicity;
  DualityReport duality;
};

/// Everything computed so far; stages fill it in order.
struct PipelineState {
  RunConfig config;
  std::shared_ptr<const VectorFieldModel> model;
  std::optional<Cycle> cycle;
  std::optional<FloquetSpectrum> spectrum;
  std::optional<ResonanceReport> resonance;
  std::optional<Frame> bundle;
  std::optional<Frame> adjoint;
  std::optional<FrameSummary> frames;
  std::optional<ManifoldExpansion> manifold;
  std::optional<ResponseExpansion> response;
  std::optional<ValidationSummary> validation;
};

// In-memory stages (no I/O). Each requires the previous ones.
void compute_cycle(PipelineState& s);
/// Spectrum, resonance check (throws ResonanceError when flagged) and frames.
/// With checks set, also the frame diagnostics, the Psi cross-check and the
/// duality check.
void compute_floquet(PipelineState& s, bool checks = true);
void compute_manifold(PipelineState& s);
void compute_response(PipelineState& s);
void compute_validation(PipelineState& s);

struct ThresholdCheck {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool pass = true;
};

/// Threshold checks for whatever stages are present in the state.
std::vector<ThresholdCheck> threshold_checks(const PipelineState& s);

struct CommandResult {
  nlohmann::json manifest;
  std::vector<ThresholdCheck> checks;
  bool passed() const;
};

/// Run one subcommand against config.out: load the artifacts it needs,
/// compute, write artifacts and the manifest. On failure the manifest marks
/// the failed stage and a StageError is thrown.
CommandResult run_command(Command command, const RunConfig& config);

/// Full pipeline including plot data.
inline CommandResult run_pipeline(const RunConfig& config) { return run_command(Command::run, config); }

/// Rebuild state from the artifacts in config.out up to and including the
/// given stage (cycle, manifold, response).
PipelineState load_state(const RunConfig& config, Command up_to);

// Artifact I/O.

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

/// "theta,<names>" then one row per grid point at 17 significant digits.
void write_grid_csv(const std::filesystem::path& path, const RealGrid& grid, const std::vector<std::string>& names);
/// Reads a file written by write_grid_csv; the header must match names.
RealGrid read_grid_csv(const std::filesystem::path& path, const std::vector<std::string>& names, int period = 1);
/// Columns k, <name>.re, <name>.im per component; k from -M/2 to M/2-1.
void write_series_csv(const std::filesystem::path& path, const FourierSeries& series,
                      const std::vector<std::string>& names);
/// theta then every entry (column j, component i) of the frame; complex
/// frames get .re/.im pairs.
void write_frame_csv(const std::filesystem::path& path, const Frame& frame, const std::vector<std::string>& names);

/// Plot data files for the current state; returns the paths written.
std::vector<std::filesystem::path> export_plotdata(const PipelineState& s, const std::filesystem::path& dir);

/// Check that every file listed in a manifest exists with its checksum.
/// Returns the paths that are missing or differ.
std::vector<std::string> verify_manifest(const std::filesystem::path& out_dir);

}  // namespace slowman
