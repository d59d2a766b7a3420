#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "expms/damping.hpp"
#include "expms/grid.hpp"
#include "expms/newton.hpp"
#include "expms/schemes.hpp"

namespace expms {

using nlohmann::json;

/// Scalar coefficient function given in the configuration document:
/// either a constant or offset + amplitude * sin(frequency * t).
struct FunctionSpec {
  enum class Kind { constant, sinusoid };
  Kind kind = Kind::constant;
  double value = 0.0;
  double offset = 0.0;
  double amplitude = 0.0;
  double frequency = 0.0;

  DampingCoefficient to_coefficient() const {
    return kind == Kind::constant ? DampingCoefficient::constant(value)
                                  : DampingCoefficient::sinusoid(offset, amplitude, frequency);
  }

  friend bool operator==(const FunctionSpec&, const FunctionSpec&) = default;
};

struct GridConfig {
  double x_min = 0.0;
  double x_max = 0.0;
  int n_nodes = 0;
  Boundary boundary = Boundary::periodic;

  Grid1D to_grid() const { return {n_nodes, x_min, x_max, boundary}; }
  friend bool operator==(const GridConfig&, const GridConfig&) = default;
};

struct OutputConfig {
  std::string directory = "out";
  int snapshot_stride = 100;
  int diagnostics_stride = 1;

  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct NewtonSettings {
  double tol = 1e-12;
  int max_iter = 50;
  std::string jacobian = "analytic";  ///< "analytic" | "finite-difference"

  NewtonConfig to_config() const {
    NewtonConfig cfg;
    cfg.tol = tol;
    cfg.max_iter = max_iter;
    cfg.jacobian = jacobian == "finite-difference" ? NewtonConfig::JacobianMode::finite_difference
                                                   : NewtonConfig::JacobianMode::analytic;
    return cfg;
  }
  friend bool operator==(const NewtonSettings&, const NewtonSettings&) = default;
};

/// One experiment run.  Models: "nls" (two-component exponential scheme),
/// "nls4" / "nls4_conjugate" (full four-component system, any generic
/// scheme), "ch" (Camassa-Holm), "decay" (S = 0, L = 0 exact-decay check).
struct RunConfig {
  std::string model;
  SchemeKind scheme = SchemeKind::embs;
  GridConfig grid;
  double dt = 0.0;
  double t_end = 0.0;
  std::string ic;
  std::map<std::string, double> scalars;          ///< e.g. gamma, c, omega
  std::map<std::string, FunctionSpec> functions;  ///< e.g. gamma_t
  NewtonSettings newton;
  OutputConfig output;
  long seed = 0;
  std::optional<std::string> restart_from;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  double scalar(const std::string& name, double fallback = 0.0) const {
    const auto it = scalars.find(name);
    return it == scalars.end() ? fallback : it->second;
  }
};

namespace detail {

inline void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                                const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw ConfigurationError("unknown configuration key '" + path + key + "'");
    }
  }
}

inline FunctionSpec parse_function_spec(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigurationError("expected an object at '" + path + "'");
  FunctionSpec spec;
  const std::string kind = j.value("kind", std::string());
  if (kind == "constant") {
    reject_unknown_keys(j, {"kind", "value"}, path + ".");
    spec.kind = FunctionSpec::Kind::constant;
    spec.value = j.at("value").get<double>();
  } else if (kind == "sinusoid") {
    reject_unknown_keys(j, {"kind", "offset", "amplitude", "frequency"}, path + ".");
    spec.kind = FunctionSpec::Kind::sinusoid;
    spec.offset = j.at("offset").get<double>();
    spec.amplitude = j.at("amplitude").get<double>();
    spec.frequency = j.at("frequency").get<double>();
  } else {
    throw ConfigurationError("unknown function kind '" + kind + "' at '" + path + "'");
  }
  return spec;
}

inline json function_spec_to_json(const FunctionSpec& spec) {
  json j;
  if (spec.kind == FunctionSpec::Kind::constant) {
    j["kind"] = "constant";
    j["value"] = spec.value;
  } else {
    j["kind"] = "sinusoid";
    j["offset"] = spec.offset;
    j["amplitude"] = spec.amplitude;
    j["frequency"] = spec.frequency;
  }
  return j;
}

}  // namespace detail

inline void validate(const RunConfig& cfg) {
  static const std::set<std::string> models = {"nls", "nls4", "nls4_conjugate", "ch", "decay"};
  if (!models.count(cfg.model)) throw ConfigurationError("validation: unknown model '" + cfg.model + "'");
  if (!(cfg.dt > 0.0)) throw ConfigurationError("validation: dt must be positive");
  if (!(cfg.t_end > 0.0)) throw ConfigurationError("validation: t_end must be positive");
  if (cfg.grid.n_nodes < 3) throw ConfigurationError("validation: grid.n_nodes must be >= 3");
  if (!(cfg.grid.x_max > cfg.grid.x_min)) {
    throw ConfigurationError("validation: grid.x_max must exceed grid.x_min");
  }
  if (cfg.output.snapshot_stride < 1 || cfg.output.diagnostics_stride < 1) {
    throw ConfigurationError("validation: output strides must be >= 1");
  }
  if (cfg.newton.max_iter < 1) throw ConfigurationError("validation: newton.max_iter must be >= 1");
  if (!(cfg.newton.tol > 0.0)) throw ConfigurationError("validation: newton.tol must be positive");
  if (cfg.model == "ch") {
    if (cfg.grid.boundary != Boundary::periodic) {
      throw ConfigurationError("validation: model 'ch' requires a periodic boundary");
    }
    if (cfg.scheme != SchemeKind::expbox && cfg.scheme != SchemeKind::midpoint_box) {
      throw ConfigurationError("validation: model 'ch' supports schemes expbox and midpoint_box");
    }
  }
  if (cfg.model == "nls" &&
      (cfg.scheme != SchemeKind::embs && cfg.scheme != SchemeKind::mixed_euler)) {
    throw ConfigurationError("validation: model 'nls' supports schemes embs and mixed_euler");
  }
}

inline RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("configuration parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigurationError("configuration must be a JSON object");
  detail::reject_unknown_keys(j,
                              {"model", "scheme", "grid", "dt", "t_end", "ic", "coefficients",
                               "newton", "output", "seed", "restart_from"},
                              "");
  RunConfig cfg;
  try {
    cfg.model = j.at("model").get<std::string>();
    cfg.scheme = scheme_from_string(j.at("scheme").get<std::string>());

    const json& g = j.at("grid");
    detail::reject_unknown_keys(g, {"x_min", "x_max", "n_nodes", "boundary"}, "grid.");
    cfg.grid.x_min = g.at("x_min").get<double>();
    cfg.grid.x_max = g.at("x_max").get<double>();
    cfg.grid.n_nodes = g.at("n_nodes").get<int>();
    const std::string boundary = g.at("boundary").get<std::string>();
    if (boundary == "periodic") {
      cfg.grid.boundary = Boundary::periodic;
    } else if (boundary == "anti-periodic") {
      cfg.grid.boundary = Boundary::antiperiodic;
    } else {
      throw ConfigurationError("unknown boundary '" + boundary + "' at 'grid.boundary'");
    }

    cfg.dt = j.at("dt").get<double>();
    cfg.t_end = j.at("t_end").get<double>();
    cfg.ic = j.at("ic").get<std::string>();

    if (j.contains("coefficients")) {
      for (const auto& [key, value] : j.at("coefficients").items()) {
        if (value.is_number()) {
          cfg.scalars[key] = value.get<double>();
        } else {
          cfg.functions[key] = detail::parse_function_spec(value, "coefficients." + key);
        }
      }
    }
    if (j.contains("newton")) {
      const json& n = j.at("newton");
      detail::reject_unknown_keys(n, {"tol", "max_iter", "jacobian"}, "newton.");
      cfg.newton.tol = n.value("tol", cfg.newton.tol);
      cfg.newton.max_iter = n.value("max_iter", cfg.newton.max_iter);
      cfg.newton.jacobian = n.value("jacobian", cfg.newton.jacobian);
      if (cfg.newton.jacobian != "analytic" && cfg.newton.jacobian != "finite-difference") {
        throw ConfigurationError("newton.jacobian must be 'analytic' or 'finite-difference'");
      }
    }
    if (j.contains("output")) {
      const json& o = j.at("output");
      detail::reject_unknown_keys(o, {"directory", "snapshot_stride", "diagnostics_stride"},
                                  "output.");
      cfg.output.directory = o.value("directory", cfg.output.directory);
      cfg.output.snapshot_stride = o.value("snapshot_stride", cfg.output.snapshot_stride);
      cfg.output.diagnostics_stride = o.value("diagnostics_stride", cfg.output.diagnostics_stride);
    }
    cfg.seed = j.value("seed", 0L);
    if (j.contains("restart_from")) cfg.restart_from = j.at("restart_from").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigurationError(std::string("configuration error: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

inline std::string serialize_config(const RunConfig& cfg) {
  json j;
  j["model"] = cfg.model;
  j["scheme"] = to_string(cfg.scheme);
  j["grid"] = {{"x_min", cfg.grid.x_min},
               {"x_max", cfg.grid.x_max},
               {"n_nodes", cfg.grid.n_nodes},
               {"boundary", cfg.grid.boundary == Boundary::periodic ? "periodic" : "anti-periodic"}};
  j["dt"] = cfg.dt;
  j["t_end"] = cfg.t_end;
  j["ic"] = cfg.ic;
  json coeffs = json::object();
  for (const auto& [key, value] : cfg.scalars) coeffs[key] = value;
  for (const auto& [key, spec] : cfg.functions) coeffs[key] = detail::function_spec_to_json(spec);
  j["coefficients"] = coeffs;
  j["newton"] = {{"tol", cfg.newton.tol},
                 {"max_iter", cfg.newton.max_iter},
                 {"jacobian", cfg.newton.jacobian}};
  j["output"] = {{"directory", cfg.output.directory},
                 {"snapshot_stride", cfg.output.snapshot_stride},
                 {"diagnostics_stride", cfg.output.diagnostics_stride}};
  j["seed"] = cfg.seed;
  if (cfg.restart_from) j["restart_from"] = *cfg.restart_from;
  return j.dump(2);
}

/// Experiment presets reproducing the reference runs; t spans [0, 10] there,
/// truncate with t_end overrides for quick checks.
inline RunConfig preset(const std::string& name) {
  RunConfig cfg;
  cfg.newton.tol = 1e-12;
  if (name == "nls_dark" || name == "nls_gaussian" || name == "nls_soliton_pair" ||
      name == "nls_soliton_pair_midpoint") {
    cfg.model = "nls";
    cfg.scheme = name == "nls_soliton_pair_midpoint" ? SchemeKind::mixed_euler : SchemeKind::embs;
    cfg.grid = {-30.0, 30.0, 600,
                name == "nls_dark" ? Boundary::antiperiodic : Boundary::periodic};
    cfg.dt = 0.001;
    cfg.t_end = 10.0;
    cfg.ic = name == "nls_dark" ? "tanh_dark"
             : name == "nls_gaussian" ? "gaussian"
                                      : "soliton_pair";
    cfg.scalars = {{"gamma", 0.1}, {"c", -0.2}, {"omega", M_PI}};
    cfg.output.snapshot_stride = 500;
    cfg.output.diagnostics_stride = 1;
    cfg.output.directory = "out/" + name;
    return cfg;
  }
  if (name == "ch_cosine" || name == "ch_kink" || name == "ch_cosine_preissmann" ||
      name == "ch_kink_preissmann") {
    const bool baseline = name.find("preissmann") != std::string::npos;
    cfg.model = "ch";
    cfg.scheme = baseline ? SchemeKind::midpoint_box : SchemeKind::expbox;
    cfg.grid = {-M_PI, M_PI, 90, Boundary::periodic};
    cfg.dt = 0.001;
    cfg.t_end = 10.0;
    cfg.ic = name.find("kink") != std::string::npos ? "ch_kink" : "ch_cosine";
    FunctionSpec gamma_t;
    gamma_t.kind = FunctionSpec::Kind::sinusoid;
    gamma_t.offset = 0.0;
    gamma_t.amplitude = -0.2;
    gamma_t.frequency = M_PI;
    cfg.functions = {{"gamma_t", gamma_t}};
    cfg.output.snapshot_stride = 500;
    cfg.output.diagnostics_stride = 1;
    cfg.output.directory = "out/" + name;
    return cfg;
  }
  throw ConfigurationError("unknown preset '" + name + "'");
}

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "nls_dark",  "nls_gaussian", "nls_soliton_pair",    "nls_soliton_pair_midpoint",
      "ch_cosine", "ch_kink",      "ch_cosine_preissmann", "ch_kink_preissmann"};
  return names;
}

}  // namespace expms
