#include "slowman/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

extern char** environ;

namespace slowman {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size()) throw InvalidArgument("config key '" + key + "': not a number: '" + v + "'");
  return x;
}

std::size_t to_size(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t.empty() || !std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isdigit(c); })) {
    throw InvalidArgument("config key '" + key + "': not a nonnegative integer: '" + v + "'");
  }
  return static_cast<std::size_t>(std::stoull(t));
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw InvalidArgument("config key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& s : split_list(v)) out.push_back(to_double(key, s));
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s;
}

struct Key {
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SSM_DOUBLE(KEY, FIELD)                                                           \
  Key {                                                                                  \
    KEY, [](RunConfig& c, const std::string& v) { c.FIELD = to_double(KEY, v); },        \
        [](const RunConfig& c) { return fmt(c.FIELD); }                                  \
  }
#define SSM_SIZE(KEY, FIELD)                                                             \
  Key {                                                                                  \
    KEY, [](RunConfig& c, const std::string& v) { c.FIELD = to_size(KEY, v); },          \
        [](const RunConfig& c) { return std::to_string(c.FIELD); }                       \
  }

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      Key{"model", [](RunConfig& c, const std::string& v) { c.model = trim(v); },
          [](const RunConfig& c) { return c.model; }},
      Key{"representation",
          [](RunConfig& c, const std::string& v) { c.representation = parse_representation(trim(v)); },
          [](const RunConfig& c) { return representation_name(c.representation); }},
      SSM_SIZE("L", L),
      Key{"out", [](RunConfig& c, const std::string& v) { c.out = trim(v); },
          [](const RunConfig& c) { return c.out.string(); }},
      Key{"seed", [](RunConfig& c, const std::string& v) { c.samples.seed = to_size("seed", v); },
          [](const RunConfig& c) { return std::to_string(c.samples.seed); }},
      Key{"tolerances", [](RunConfig& c, const std::string& v) { c.accuracy.tolerances = to_list("tolerances", v); },
          [](const RunConfig& c) { return join(c.accuracy.tolerances); }},
      SSM_DOUBLE("integrator.rtol", integrator.rtol),
      SSM_DOUBLE("integrator.atol", integrator.atol),
      SSM_SIZE("integrator.max_steps", integrator.max_steps),
      Key{"cycle.guess", [](RunConfig& c, const std::string& v) { c.cycle.guess = to_list("cycle.guess", v); },
          [](const RunConfig& c) { return join(c.cycle.guess); }},
      SSM_DOUBLE("cycle.relax_time", cycle.relax_time),
      SSM_DOUBLE("cycle.newton_tol", cycle.newton_tol),
      SSM_SIZE("cycle.max_newton", cycle.max_newton),
      SSM_SIZE("cycle.grid_N", cycle.grid_N),
      Key{"cycle.phase_component",
          [](RunConfig& c, const std::string& v) { c.cycle.phase_component = static_cast<int>(to_double("cycle.phase_component", v)); },
          [](const RunConfig& c) { return std::to_string(c.cycle.phase_component); }},
      SSM_SIZE("floquet.segments", floquet.segments),
      SSM_DOUBLE("floquet.duality_rtol", duality_rtol),
      SSM_SIZE("floquet.duality_points", duality_points),
      SSM_SIZE("resonance.order", resonance_order),
      SSM_DOUBLE("resonance.tol", resonance_tol),
      Key{"resonance.inject_exponents",
          [](RunConfig& c, const std::string& v) {
            c.inject_exponents.clear();
            for (const auto& item : split_list(v)) {
              const auto colon = item.find(':');
              const double re = to_double("resonance.inject_exponents", item.substr(0, colon));
              const double im = colon == std::string::npos ? 0.0 : to_double("resonance.inject_exponents", item.substr(colon + 1));
              c.inject_exponents.emplace_back(re, im);
            }
          },
          [](const RunConfig& c) {
            std::string s;
            for (std::size_t i = 0; i < c.inject_exponents.size(); ++i) {
              s += (i ? ", " : "") + fmt(c.inject_exponents[i].real()) + ":" + fmt(c.inject_exponents[i].imag());
            }
            return s;
          }},
      Key{"bundle.scale", [](RunConfig& c, const std::string& v) { c.bundle_scale = to_list("bundle.scale", v); },
          [](const RunConfig& c) { return join(c.bundle_scale); }},
      SSM_DOUBLE("expansion.small_divisor_tol", small_divisor_tol),
      SSM_DOUBLE("expansion.solvability_tol", solvability_tol),
      SSM_DOUBLE("validation.window", accuracy.window),
      Key{"validation.expand", [](RunConfig& c, const std::string& v) { c.accuracy.expand = to_bool("validation.expand", v); },
          [](const RunConfig& c) { return std::string(c.accuracy.expand ? "true" : "false"); }},
      SSM_SIZE("validation.scan", accuracy.scan),
      SSM_SIZE("validation.samples", samples.count),
      SSM_DOUBLE("validation.horizon_periods", samples.horizon_periods),
      SSM_SIZE("validation.horizons", trajectory.horizons),
      SSM_DOUBLE("validation.decay_floor", trajectory.decay_floor),
      SSM_DOUBLE("thresholds.homological", thresholds.homological),
      SSM_DOUBLE("thresholds.frame", thresholds.frame),
      SSM_DOUBLE("thresholds.orthogonality", thresholds.orthogonality),
      SSM_DOUBLE("thresholds.conjugacy", thresholds.conjugacy),
      SSM_DOUBLE("thresholds.decay", thresholds.decay),
      SSM_DOUBLE("thresholds.directional", thresholds.directional),
  };
  return keys;
}

#undef SSM_DOUBLE
#undef SSM_SIZE

void apply(RunConfig& c, const std::string& key, const std::string& value) {
  if (key.rfind("params.", 0) == 0 && key.size() > 7) {
    c.params[key.substr(7)] = to_double(key, value);
    return;
  }
  for (const auto& k : key_table()) {
    if (k.name == key) {
      k.set(c, value);
      return;
    }
  }
  throw InvalidArgument("unknown config key '" + key + "'");
}

}  // namespace

void RunConfig::validate() const {
  if (model.empty()) throw InvalidArgument("model must be set");
  integrator.validate();
  if (!is_power_of_two(cycle.grid_N) || cycle.grid_N < 16) throw InvalidArgument("cycle.grid_N must be a power of two >= 16");
  if (!(cycle.relax_time >= 0.0) || !(cycle.newton_tol > 0.0)) throw InvalidArgument("cycle settings out of range");
  if (floquet.segments < 1 || cycle.grid_N % floquet.segments != 0) {
    throw InvalidArgument("floquet.segments must divide cycle.grid_N");
  }
  if (!(duality_rtol > 0.0) || duality_points < 1) throw InvalidArgument("floquet duality settings out of range");
  if (L < 1) throw InvalidArgument("L must be at least 1");
  if (resonance_order < 2) throw InvalidArgument("resonance.order must be at least 2");
  if (!(resonance_tol > 0.0) || !(small_divisor_tol > 0.0) || !(solvability_tol > 0.0)) {
    throw InvalidArgument("tolerances must be positive");
  }
  accuracy.validate();
  if (samples.count < 1) throw InvalidArgument("validation.samples must be at least 1");
  if (!(samples.horizon_periods >= 0.0) || trajectory.horizons < 1) throw InvalidArgument("trajectory horizon settings out of range");
  for (double b : bundle_scale) {
    if (!std::isfinite(b) || b == 0.0) throw InvalidArgument("bundle.scale entries must be finite and nonzero");
  }
  if (out.empty()) throw InvalidArgument("out must be set");
}

std::map<std::string, std::string> RunConfig::echo() const {
  std::map<std::string, std::string> m;
  for (const auto& k : key_table()) m[k.name] = k.get(*this);
  for (const auto& [name, v] : params) m["params." + name] = fmt(v);
  return m;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : key_table()) out.push_back(k.name);
  std::sort(out.begin(), out.end());
  return out;
}

std::string env_name(const std::string& key) {
  std::string s = "SSM_";
  for (char ch : key) s += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return s;
}

RunConfig parse_config(const std::string& text, const std::map<std::string, std::string>& overrides) {
  boost::property_tree::ptree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw InvalidArgument("config syntax error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  RunConfig c;
  for (const auto& [name, node] : tree) {
    if (node.empty()) {
      apply(c, name, node.data());
      continue;
    }
    for (const auto& [sub, leaf] : node) apply(c, name + "." + sub, leaf.data());
  }
  for (const auto& [key, value] : overrides) apply(c, key, value);
  c.validate();
  return c;
}

std::map<std::string, std::string> environment_overrides() {
  std::map<std::string, std::string> out;
  for (const auto& k : key_table()) {
    if (const char* v = std::getenv(env_name(k.name).c_str())) out[k.name] = v;
  }
  // SSM_PARAMS_<name>: the parameter name keeps its spelling
  for (char** e = environ; e && *e; ++e) {
    const std::string entry = *e;
    const std::string prefix = "SSM_PARAMS_";
    if (entry.rfind(prefix, 0) != 0) continue;
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    out["params." + entry.substr(prefix.size(), eq - prefix.size())] = entry.substr(eq + 1);
  }
  return out;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config file '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), environment_overrides());
}

}  // namespace slowman
