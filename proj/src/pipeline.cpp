#include "slowman/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>

namespace slowman {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string multi_index_text(const ResonanceEntry& e) {
  std::string s = "(";
  for (std::size_t i = 0; i < e.multi_index.size(); ++i) s += (i ? "," : "") + std::to_string(e.multi_index[i]);
  return s + ") -> " + std::to_string(e.target);
}

std::string resonance_message(const std::vector<ResonanceEntry>& entries) {
  std::string s = "resonance among the Floquet exponents:";
  for (const auto& e : entries) {
    char buf[48];
    std::snprintf(buf, sizeof buf, " |residual| %.3e", e.residual);
    s += " " + multi_index_text(e) + buf + ";";
  }
  return s;
}

std::string order_name(const std::string& symbol, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%02zu.csv", symbol.c_str(), n);
  return buf;
}

std::string tolerance_tag(double tol) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", tol);
  return buf;
}

json complex_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

double vmax(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

void write_json(const fs::path& path, const json& j) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << j.dump(2) << '\n';
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

json read_json(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path.string() + "'");
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw IoError("'" + path.string() + "': " + e.what());
  }
}

std::vector<std::string> sigma_columns(const std::vector<double>& tolerances) {
  std::vector<std::string> names;
  for (double t : tolerances) {
    names.push_back("upper_" + tolerance_tag(t));
    names.push_back("lower_" + tolerance_tag(t));
  }
  return names;
}

json order_table(const std::vector<OrderDiagnostics>& orders) {
  json a = json::array();
  for (const auto& o : orders) {
    a.push_back({{"n", o.n},
                 {"residual", o.residual},
                 {"relative_residual", o.relative_residual},
                 {"full_band_residual", o.full_band_residual},
                 {"min_divisor", o.min_divisor},
                 {"imag_drift", o.imag_drift},
                 {"norm", o.norm}});
  }
  return a;
}

json order_table(const std::vector<AdjointOrderDiagnostics>& orders) {
  json a = json::array();
  for (const auto& o : orders) {
    a.push_back({{"n", o.n},
                 {"residual", o.residual},
                 {"relative_residual", o.relative_residual},
                 {"full_band_residual", o.full_band_residual},
                 {"min_divisor", o.min_divisor},
                 {"imag_drift", o.imag_drift},
                 {"norm", o.norm}});
  }
  return a;
}

// ---- stage artifacts ------------------------------------------------------

json write_cycle(const PipelineState& s, const fs::path& out) {
  const auto& c = *s.cycle;
  const auto names = s.model->component_names();
  json j = {{"model", s.model->name()},
            {"parameters", s.model->parameters()},
            {"components", names},
            {"T", c.T},
            {"anchor", c.anchor},
            {"N", c.samples.points()},
            {"closure_residual", c.closure_residual},
            {"newton_iterations", c.newton_iterations}};
  write_json(out / "cycle.json", j);
  write_grid_csv(out / "cycle.csv", c.samples, names);
  return {{"T", c.T}, {"N", c.samples.points()}, {"closure_residual", c.closure_residual},
          {"newton_iterations", c.newton_iterations}};
}

json spectrum_json(const FloquetSpectrum& sp, const ResonanceReport& res) {
  json table = json::array();
  for (std::size_t j = 0; j < sp.dimension(); ++j) {
    table.push_back({{"index", j},
                     {"class", class_name(sp.classes[j])},
                     {"multiplier", complex_json(sp.multipliers[j])},
                     {"exponent", complex_json(sp.exponents[j])},
                     {"lyapunov", sp.lyapunov[j]}});
  }
  json flagged = json::array();
  for (const auto& e : res.flagged) {
    flagged.push_back({{"multi_index", e.multi_index}, {"target", e.target}, {"residual", e.residual}});
  }
  const auto closest = std::min_element(res.entries.begin(), res.entries.end(),
                                        [](const auto& a, const auto& b) { return a.residual < b.residual; });
  json resonance = {{"max_order", res.max_order},
                    {"tol", res.tol},
                    {"checked", res.entries.size()},
                    {"flagged", flagged},
                    {"min_residual", res.min_residual},
                    {"divisor_minima",
                     {{"manifold", res.divisors.manifold},
                      {"phase", res.divisors.phase},
                      {"amplitude", res.divisors.amplitude}}},
                    {"divisor_flag", res.divisor_flag}};
  if (closest != res.entries.end()) {
    resonance["closest"] = {{"multi_index", closest->multi_index}, {"target", closest->target},
                            {"residual", closest->residual}};
  }
  return {{"T", sp.T},
          {"slow_index", sp.slow_index},
          {"lambda_s", sp.exponents[sp.slow_index].real()},
          {"table", table},
          {"eigenvector_condition", sp.eigenvector_condition},
          {"trace_integral", sp.trace_integral},
          {"log_abs_det", sp.log_abs_det},
          {"segments", sp.segments},
          {"resonance", resonance}};
}

json frames_json(const PipelineState& s) {
  const auto& f = *s.frames;
  json j = {{"representation", representation_name(s.bundle->representation)},
            {"period", s.bundle->period},
            {"bundle_ode_residual", f.bundle.ode_residual},
            {"adjoint_ode_residual", f.adjoint.ode_residual},
            {"adjoint_ode_residual_abs", f.adjoint.ode_residual_abs},
            {"max_condition", f.bundle.max_condition},
            {"biorthogonality", f.biorthogonality},
            {"phase_normalization", f.phase_normalization},
            {"cross_check",
             {{"max_multiplier_error", f.cross_check.max_multiplier_error},
              {"column_relative_error", f.cross_check.column_relative_error},
              {"max_column_error", f.cross_check.max_column_error}}},
            {"duality",
             {{"times", f.duality.times}, {"deviation", f.duality.deviation}, {"max", vmax(f.duality.deviation)},
              {"rtol", s.config.duality_rtol}}}};
  if (!f.bundle_antiperiodicity.empty()) {
    j["bundle_antiperiodicity"] = f.bundle_antiperiodicity;
    j["adjoint_antiperiodicity"] = f.adjoint_antiperiodicity;
  }
  json files = {"frames/bundle.csv", "frames/adjoint.csv"};
  j["files"] = files;
  return j;
}

json write_floquet(const PipelineState& s, const fs::path& out) {
  json sp = spectrum_json(*s.spectrum, *s.resonance);
  write_json(out / "floquet.json", sp);
  const auto names = s.model->component_names();
  write_frame_csv(out / "frames/bundle.csv", *s.bundle, names);
  write_frame_csv(out / "frames/adjoint.csv", *s.adjoint, names);
  return sp;
}

json write_manifold(const PipelineState& s, const fs::path& out) {
  const auto& m = *s.manifold;
  const auto names = s.model->component_names();
  for (std::size_t n = 0; n <= m.order(); ++n) {
    write_grid_csv(out / "manifold" / order_name("K", n), m.K[n], names);
    write_series_csv(out / "manifold" / order_name("K_series", n), FourierSeries::analyze(m.K[n]), names);
  }
  return {{"L", m.order()},
          {"N", m.points()},
          {"gauge", m.gauge},
          {"lambda_s", m.lambda_s},
          {"representation", representation_name(m.representation)},
          {"orders", order_table(m.orders)},
          {"warnings", m.warnings}};
}

json write_response(const PipelineState& s, const fs::path& out) {
  const auto& r = *s.response;
  const auto names = s.model->component_names();
  for (std::size_t n = 0; n <= r.order(); ++n) {
    write_grid_csv(out / "response" / order_name("Z", n), r.Z[n], names);
    write_grid_csv(out / "response" / order_name("I", n), r.I[n], names);
  }
  return {{"L", r.order()},
          {"solvability_residual", r.solvability_residual},
          {"free_coefficient", r.free_coefficient},
          {"normalization_residual", r.normalization_residual},
          {"wilson_residual", r.wilson_residual},
          {"z_orders", order_table(r.z_orders)},
          {"i_orders", order_table(r.i_orders)}};
}

json write_validation(const PipelineState& s, const fs::path& out) {
  const auto& v = *s.validation;
  const auto& dom = v.domain;
  RealGrid sig(2 * dom.tolerances.size(), dom.theta.size());
  json domain = json::array();
  for (std::size_t k = 0; k < dom.tolerances.size(); ++k) {
    for (std::size_t g = 0; g < dom.theta.size(); ++g) {
      sig(2 * k, g) = dom.upper[k][g];
      sig(2 * k + 1, g) = dom.lower[k][g];
    }
    const auto [ulo, uhi] = std::minmax_element(dom.upper[k].begin(), dom.upper[k].end());
    const auto [llo, lhi] = std::minmax_element(dom.lower[k].begin(), dom.lower[k].end());
    const auto& sl = v.slopes[k];
    domain.push_back({{"tolerance", dom.tolerances[k]},
                      {"upper_min", *ulo},
                      {"upper_max", *uhi},
                      {"lower_min", *llo},
                      {"lower_max", *lhi},
                      {"min_extent", dom.min_extent(k)},
                      {"two_sided", dom.two_sided(k)},
                      {"slope_global_upper", sl.global_upper},
                      {"slope_global_lower", sl.global_lower},
                      {"slope_min", sl.min},
                      {"slope_median", sl.median},
                      {"slope_max", sl.max}});
  }
  write_grid_csv(out / "validation/sigma_max.csv", sig, sigma_columns(dom.tolerances));

  json orth = json::array();
  for (const auto& r : v.orthogonality.rows) {
    json row = {{"n", r.n},
                {"z_theta", r.z_theta},
                {"i_theta", r.i_theta},
                {"z_theta_spectral", r.z_theta_spectral},
                {"i_theta_spectral", r.i_theta_spectral}};
    if (r.z_sigma >= 0.0) {
      row["z_sigma"] = r.z_sigma;
      row["i_sigma"] = r.i_sigma;
    }
    orth.push_back(row);
  }
  json checks = json::array();
  for (const auto& c : v.trajectory.checks) {
    checks.push_back({{"theta", c.start.theta},
                      {"sigma", c.start.sigma},
                      {"conjugacy", vmax(c.conjugacy)},
                      {"phase_drift", vmax(c.phase_drift)},
                      {"decay_error", vmax(c.decay_error)},
                      {"ratio_error", vmax(c.ratio_error)},
                      {"inversion_failures", c.inversion_failures}});
  }
  const auto& tr = v.trajectory;
  json summary = {{"window", dom.window},
                  {"non_monotone", dom.non_monotone.size()},
                  {"domain", domain},
                  {"orthogonality",
                   {{"max_deviation", v.orthogonality.max_deviation},
                    {"max_spectral_deviation", v.orthogonality.max_spectral_deviation}}},
                  {"trajectory",
                   {{"samples", v.samples.size()},
                    {"sample_tolerance", dom.tolerances[v.sample_tolerance]},
                    {"seed", s.config.samples.seed},
                    {"max_conjugacy", tr.max_conjugacy},
                    {"max_phase_drift", tr.max_phase_drift},
                    {"max_decay_error", tr.max_decay_error},
                    {"max_ratio_error", tr.max_ratio_error},
                    {"unresolved_decay", tr.unresolved_decay},
                    {"inversion_failures", tr.inversion_failures}}},
                  {"directional", {{"phase", v.directional.phase}, {"amplitude", v.directional.amplitude}}}};
  json full = summary;
  full["orthogonality"]["rows"] = orth;
  full["trajectory"]["checks"] = checks;
  write_json(out / "validation/validation.json", full);
  summary["files"] = {"validation/validation.json", "validation/sigma_max.csv"};
  return summary;
}

AccuracyDomain read_domain(const PipelineState& s, const fs::path& out) {
  const auto& tols = s.config.accuracy.tolerances;
  const RealGrid sig = read_grid_csv(out / "validation/sigma_max.csv", sigma_columns(tols));
  AccuracyDomain dom;
  dom.tolerances = tols;
  for (std::size_t g = 0; g < sig.points(); ++g) dom.theta.push_back(sig.theta(g));
  dom.upper.assign(tols.size(), {});
  dom.lower.assign(tols.size(), {});
  for (std::size_t k = 0; k < tols.size(); ++k) {
    for (std::size_t g = 0; g < sig.points(); ++g) {
      dom.upper[k].push_back(sig(2 * k, g));
      dom.lower[k].push_back(sig(2 * k + 1, g));
    }
  }
  return dom;
}

json inventory(const fs::path& out) {
  std::vector<std::string> paths;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), out).generic_string();
    if (rel == "manifest.json") continue;
    paths.push_back(rel);
  }
  std::sort(paths.begin(), paths.end());
  json files = json::array();
  for (const auto& p : paths) {
    files.push_back({{"path", p}, {"bytes", fs::file_size(out / p)}, {"sha256", sha256_file(out / p)}});
  }
  return files;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e)) return 3;
  if (dynamic_cast<const IoError*>(&e)) return 4;
  if (dynamic_cast<const fs::filesystem_error*>(&e)) return 4;
  return 1;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument("stage needs " + what + " first");
}

}  // namespace

ResonanceError::ResonanceError(std::vector<ResonanceEntry> entries)
    : NumericalError(resonance_message(entries)), entries_(std::move(entries)) {}

StageError::StageError(std::string stage, int exit_code, const std::string& what)
    : Error(stage + ": " + what), stage_(std::move(stage)), exit_code_(exit_code) {}

std::string command_name(Command c) {
  switch (c) {
    case Command::run: return "run";
    case Command::cycle: return "cycle";
    case Command::floquet: return "floquet";
    case Command::manifold: return "manifold";
    case Command::response: return "response";
    case Command::validate: return "validate";
    case Command::export_data: return "export";
  }
  return "?";
}

Command parse_command(const std::string& s) {
  for (Command c : {Command::run, Command::cycle, Command::floquet, Command::manifold, Command::response,
                    Command::validate, Command::export_data}) {
    if (command_name(c) == s) return c;
  }
  throw InvalidArgument("unknown subcommand '" + s + "'");
}

bool CommandResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ThresholdCheck& c) { return c.pass; });
}

// ---- in-memory stages -----------------------------------------------------

void compute_cycle(PipelineState& s) {
  if (!s.model) s.model = make_model(s.config.model, s.config.params);
  s.cycle = find_cycle(*s.model, s.config.cycle, s.config.integrator);
}

void compute_floquet(PipelineState& s, bool checks) {
  require(s.model && s.cycle.has_value(), "the cycle");
  const auto& cfg = s.config;
  const auto& model = *s.model;
  const auto& cycle = *s.cycle;
  s.spectrum = floquet_spectrum(model, cycle, cfg.floquet, cfg.integrator);

  FloquetSpectrum probe = *s.spectrum;
  for (std::size_t j = 0; j < cfg.inject_exponents.size() && j + 1 < probe.dimension(); ++j) {
    probe.exponents[j + 1] = cfg.inject_exponents[j];
  }
  s.resonance = check_resonances(probe, std::max(cfg.resonance_order, cfg.L), cfg.resonance_tol,
                                 cycle.samples.points());
  if (!s.resonance->flagged.empty()) throw ResonanceError(s.resonance->flagged);

  s.bundle = build_bundle_frame(model, cycle, *s.spectrum, cfg.representation, cfg.bundle_scale);
  s.adjoint = build_adjoint_frame(*s.bundle);
  if (!checks) return;

  FrameSummary f;
  f.bundle = frame_report(model, cycle.samples, *s.bundle);
  f.adjoint = frame_report(model, cycle.samples, *s.adjoint);
  f.biorthogonality = biorthogonality_error(*s.bundle, *s.adjoint);
  f.phase_normalization = phase_normalization_error(model, cycle.samples, *s.adjoint);
  if (s.bundle->period == 2) {
    for (std::size_t j = 0; j < s.bundle->dimension(); ++j) {
      f.bundle_antiperiodicity.push_back(antiperiodicity_error(*s.bundle, j));
      f.adjoint_antiperiodicity.push_back(antiperiodicity_error(*s.adjoint, j));
    }
  }
  // the Psi cross-check works on the complex frames
  if (cfg.representation == Representation::complex) {
    f.cross_check = cross_check_adjoint_frame(model, cycle, *s.spectrum, *s.bundle, *s.adjoint, cfg.floquet.segments,
                                              cfg.integrator);
  } else {
    const Frame cb = build_bundle_frame(model, cycle, *s.spectrum, Representation::complex, cfg.bundle_scale);
    const Frame ca = build_adjoint_frame(cb);
    f.cross_check = cross_check_adjoint_frame(model, cycle, *s.spectrum, cb, ca, cfg.floquet.segments, cfg.integrator);
  }
  std::vector<double> times;
  for (std::size_t k = 1; k <= cfg.duality_points; ++k) {
    times.push_back(cycle.T * static_cast<double>(k) / static_cast<double>(cfg.duality_points));
  }
  IntegratorSettings wide = cfg.integrator;
  wide.rtol = cfg.duality_rtol;
  wide.atol = cfg.duality_rtol * 1e-2;
  f.duality = fundamental_duality(model, cycle.anchor, times, wide, Precision::extended);
  s.frames = std::move(f);
}

void compute_manifold(PipelineState& s) {
  require(s.bundle && s.adjoint, "the Floquet stage");
  ManifoldSettings ms;
  ms.order = s.config.L;
  ms.small_divisor_tol = s.config.small_divisor_tol;
  s.manifold = expand_slow_manifold(*s.model, *s.cycle, *s.spectrum, *s.bundle, *s.adjoint, ms);
}

void compute_response(PipelineState& s) {
  require(s.manifold.has_value(), "the manifold");
  ResponseSettings rs;
  rs.order = s.config.L;
  rs.small_divisor_tol = s.config.small_divisor_tol;
  rs.solvability_tol = s.config.solvability_tol;
  s.response = expand_response_functions(*s.model, *s.manifold, *s.bundle, *s.adjoint, *s.spectrum, rs);
}

void compute_validation(PipelineState& s) {
  require(s.manifold && s.response, "the manifold and response");
  const auto& model = *s.model;
  const auto& m = *s.manifold;
  ValidationSummary v;
  v.domain = accuracy_domain(model, m, s.config.accuracy);
  for (std::size_t k = 0; k < v.domain.tolerances.size(); ++k) v.slopes.push_back(truncation_slopes(model, m, v.domain, k));
  v.orthogonality = orthogonality_report(model, m, *s.response);
  v.sample_tolerance = v.domain.tolerances.size() - 1;
  v.samples = sample_accuracy_domain(v.domain, v.sample_tolerance, m.T, m.lambda_s, s.config.samples);
  TrajectorySettings ts = s.config.trajectory;
  ts.integrator = s.config.integrator;
  v.trajectory = trajectory_consistency(model, m, v.samples, ts);
  v.directional = directional_derivatives(model, m, *s.response, v.samples);
  s.validation = std::move(v);
}

std::vector<ThresholdCheck> threshold_checks(const PipelineState& s) {
  const auto& th = s.config.thresholds;
  std::vector<ThresholdCheck> out;
  auto add = [&](const std::string& name, double value, double limit) {
    out.push_back({name, value, limit, value <= limit});
  };
  if (s.frames) {
    const auto& f = *s.frames;
    add("frame.bundle_ode", f.bundle.max_ode_residual, th.frame);
    add("frame.adjoint_ode", f.adjoint.max_ode_residual, th.frame);
    add("frame.biorthogonality", f.biorthogonality, th.frame);
    add("frame.psi_multipliers", f.cross_check.max_multiplier_error, th.frame);
    add("frame.psi_columns", vmax(f.cross_check.column_relative_error), th.frame);
    add("frame.duality", vmax(f.duality.deviation), th.frame);
    double anti = 0.0;
    bool any = false;
    for (std::size_t j = 0; j < f.bundle_antiperiodicity.size(); ++j) {
      if (s.bundle->classes[j] != FloquetClass::real_negative) continue;
      anti = std::max({anti, f.bundle_antiperiodicity[j], f.adjoint_antiperiodicity[j]});
      any = true;
    }
    if (any) add("frame.antiperiodicity", anti, th.frame);
  }
  if (s.manifold && !s.manifold->orders.empty()) {
    double r = 0.0;
    for (const auto& o : s.manifold->orders) r = std::max(r, o.relative_residual);
    add("homological.K", r, th.homological);
  }
  if (s.response && !s.response->z_orders.empty()) {
    double z = 0.0, i = 0.0;
    for (const auto& o : s.response->z_orders) z = std::max(z, o.relative_residual);
    for (const auto& o : s.response->i_orders) i = std::max(i, o.relative_residual);
    add("homological.Z", z, th.homological);
    add("homological.I", i, th.homological);
    add("solvability", s.response->solvability_residual, s.config.solvability_tol);
  }
  if (s.validation) {
    const auto& v = *s.validation;
    const std::size_t k = v.sample_tolerance;
    out.push_back({"domain.two_sided", v.domain.min_extent(k), 0.0, v.domain.two_sided(k)});
    add("orthogonality", v.orthogonality.max_deviation, th.orthogonality);
    add("conjugacy", v.trajectory.max_conjugacy, th.conjugacy);
    add("decay", v.trajectory.max_decay_error, th.decay);
    add("directional.phase", v.directional.phase, th.directional);
    add("directional.amplitude", v.directional.amplitude, th.directional);
  }
  return out;
}

// ---- reload ---------------------------------------------------------------

PipelineState load_state(const RunConfig& config, Command up_to) {
  const fs::path out = config.out;
  PipelineState s;
  s.config = config;
  s.model = make_model(config.model, config.params);
  const auto names = s.model->component_names();

  const json cj = read_json(out / "cycle.json");
  if (cj.value("model", std::string()) != s.model->name()) {
    throw IoError("artifacts in '" + out.string() + "' belong to model '" + cj.value("model", std::string()) + "'");
  }
  Cycle c;
  c.T = cj.at("T").get<double>();
  c.anchor = cj.at("anchor").get<std::vector<double>>();
  c.closure_residual = cj.value("closure_residual", 0.0);
  c.newton_iterations = cj.value("newton_iterations", std::size_t{0});
  c.samples = read_grid_csv(out / "cycle.csv", names);
  s.cycle = std::move(c);
  if (up_to == Command::cycle) return s;

  compute_floquet(s, false);
  if (up_to == Command::floquet || up_to == Command::manifold) return s;

  ManifoldExpansion m;
  m.T = s.cycle->T;
  m.lambda_s = s.spectrum->exponents[s.spectrum->slow_index].real();
  m.representation = config.representation;
  for (std::size_t n = 0; n <= config.L; ++n) m.K.push_back(read_grid_csv(out / "manifold" / order_name("K", n), names));
  m.gauge = grid_max_norm(m.K[1]);
  m.finalize();
  s.manifold = std::move(m);
  if (up_to == Command::response) return s;

  ResponseExpansion r;
  r.T = s.manifold->T;
  r.lambda_s = s.manifold->lambda_s;
  for (std::size_t n = 0; n <= config.L; ++n) {
    r.Z.push_back(read_grid_csv(out / "response" / order_name("Z", n), names));
    r.I.push_back(read_grid_csv(out / "response" / order_name("I", n), names));
  }
  r.finalize();
  s.response = std::move(r);
  return s;
}

// ---- commands -------------------------------------------------------------

CommandResult run_command(Command command, const RunConfig& config) {
  config.validate();
  const fs::path out = config.out;
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw StageError("setup", 4, "cannot create output directory '" + out.string() + "': " + ec.message());

  json manifest = json::object();
  if (command != Command::run && fs::exists(out / "manifest.json")) {
    try {
      manifest = read_json(out / "manifest.json");
    } catch (const IoError&) {
      manifest = json::object();
    }
  }
  manifest["tool"] = "slowman";
  manifest["version"] = tool_version;
  manifest["command"] = command_name(command);
  manifest["config"] = config.echo();
  manifest["status"] = "running";
  manifest.erase("failed_stage");
  manifest.erase("error");
  if (!manifest.contains("stages")) manifest["stages"] = json::object();

  PipelineState s;
  s.config = config;
  std::string stage = "load";

  auto timed = [&](const std::string& name, auto&& fn) {
    stage = name;
    const auto t0 = std::chrono::steady_clock::now();
    json section = fn();
    section["status"] = "ok";
    section["seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    manifest["stages"][name] = section;
  };
  auto finish = [&]() {
    manifest["files"] = inventory(out);
    write_json(out / "manifest.json", manifest);
  };

  CommandResult result;
  try {
    switch (command) {
      case Command::run:
      case Command::cycle:
        timed("cycle", [&] {
          compute_cycle(s);
          return write_cycle(s, out);
        });
        break;
      case Command::floquet:
        s = load_state(config, Command::cycle);
        break;
      case Command::manifold:
        s = load_state(config, Command::manifold);
        break;
      case Command::response:
        s = load_state(config, Command::response);
        break;
      case Command::validate:
      case Command::export_data:
        s = load_state(config, Command::validate);
        break;
    }
    if (command == Command::run || command == Command::floquet) {
      timed("floquet", [&] {
        compute_floquet(s, true);
        return write_floquet(s, out);
      });
      timed("frames", [&] { return frames_json(s); });
    }
    if (command == Command::run || command == Command::manifold) {
      timed("manifold", [&] {
        compute_manifold(s);
        return write_manifold(s, out);
      });
    }
    if (command == Command::run || command == Command::response) {
      timed("response", [&] {
        compute_response(s);
        return write_response(s, out);
      });
    }
    if (command == Command::run || command == Command::validate) {
      timed("validation", [&] {
        compute_validation(s);
        return write_validation(s, out);
      });
    }
    if (command == Command::export_data) {
      stage = "export";
      ValidationSummary v;
      v.domain = read_domain(s, out);
      s.validation = std::move(v);
    }
    if (command == Command::run || command == Command::export_data) {
      timed("export", [&] {
        json files = json::array();
        for (const auto& p : export_plotdata(s, out / "plotdata")) files.push_back(fs::relative(p, out).generic_string());
        return json{{"files", files}};
      });
    }
    stage = "report";
    if (command != Command::export_data) result.checks = threshold_checks(s);
    for (const auto& c : result.checks) {
      manifest["thresholds"][c.name] = {{"value", c.value}, {"limit", c.limit}, {"pass", c.pass}};
    }
    manifest["status"] = result.passed() ? "complete" : "threshold_failure";
    finish();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    manifest["status"] = "failed";
    manifest["failed_stage"] = stage;
    manifest["error"] = e.what();
    if (manifest["stages"].contains(stage)) manifest["stages"][stage]["status"] = "failed";
    else manifest["stages"][stage] = {{"status", "failed"}};
    if (const auto* r = dynamic_cast<const ResonanceError*>(&e)) {
      json flagged = json::array();
      for (const auto& x : r->entries()) {
        flagged.push_back({{"multi_index", x.multi_index}, {"target", x.target}, {"residual", x.residual}});
      }
      manifest["stages"][stage]["flagged"] = flagged;
    }
    try {
      finish();
    } catch (const std::exception&) {
      // the original error matters more
    }
    throw StageError(stage, exit_code_for(e), e.what());
  }
  result.manifest = manifest;
  return result;
}

std::vector<std::string> verify_manifest(const fs::path& out_dir) {
  const json m = read_json(out_dir / "manifest.json");
  std::vector<std::string> bad;
  for (const auto& f : m.value("files", json::array())) {
    const std::string p = f.at("path").get<std::string>();
    const fs::path full = out_dir / p;
    if (!fs::exists(full) || sha256_file(full) != f.at("sha256").get<std::string>()) bad.push_back(p);
  }
  return bad;
}

}  // namespace slowman
