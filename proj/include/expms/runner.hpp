#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "expms/config.hpp"
#include "expms/csv.hpp"
#include "expms/diagnostics.hpp"
#include "expms/ic.hpp"
#include "expms/models.hpp"

namespace expms {

/// Raised when a convergence-study level fails to converge.
class StudyError : public std::runtime_error {
 public:
  explicit StudyError(const std::string& what) : std::runtime_error(what) {}
};

struct RunSummary {
  std::string model;
  std::string scheme;
  int steps = 0;
  double t_final = 0.0;
  std::map<std::string, double> max_residuals;
  double wall_seconds = 0.0;
  long newton_total_iterations = 0;
  int newton_max_iterations = 0;
  bool aborted = false;
  std::string error;
};

namespace detail {

inline std::string snapshot_name(int step) {
  std::ostringstream name;
  name << "snapshot_" << std::setw(6) << std::setfill('0') << step << ".csv";
  return name.str();
}

inline std::vector<std::string> state_columns(const std::string& model) {
  if (model == "nls") return {"x", "p", "q", "abs_psi"};
  if (model == "ch") return {"x", "u"};
  if (model == "decay") return {"x", "p", "q"};
  return {"x", "p", "q", "v", "w"};  // nls4 / nls4_conjugate
}

inline void write_state(const std::filesystem::path& path, const std::string& model,
                        const Grid1D& grid, const MatrixXd& columns, double t) {
  CsvWriter out(path, state_columns(model));
  out.comment("t " + format_double(t));
  std::vector<double> row(1 + columns.cols());
  for (int n = 0; n < grid.n_nodes; ++n) {
    row[0] = grid.node(n);
    for (Eigen::Index j = 0; j < columns.cols(); ++j) row[1 + j] = columns(n, j);
    out.write_row(row);
  }
}

inline double comment_value(const CsvTable& table, const std::string& key) {
  for (const auto& [k, v] : table.comments) {
    if (k == key) {
      double out = 0.0;
      const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
      if (res.ec == std::errc()) return out;
    }
  }
  throw ConfigurationError("state file lacks a '# " + key + "' comment");
}

inline MatrixXd read_state(const std::filesystem::path& path, const std::string& model,
                           const Grid1D& grid, double& t) {
  const CsvTable table = read_csv(path);
  const auto expected = state_columns(model);
  if (table.header != expected) {
    throw ConfigurationError("state file " + path.string() + " has unexpected columns");
  }
  if (static_cast<int>(table.rows.size()) != grid.n_nodes) {
    throw ConfigurationError("state file " + path.string() + " does not match the grid");
  }
  t = comment_value(table, "t");
  const int ncols = static_cast<int>(expected.size()) - 1;
  const int nstate = model == "nls" ? 2 : ncols;  // abs_psi is derived
  MatrixXd values(grid.n_nodes, nstate);
  for (int n = 0; n < grid.n_nodes; ++n) {
    for (int j = 0; j < nstate; ++j) values(n, j) = table.rows[n][1 + j];
  }
  return values;
}

struct ModelBundle {
  // exactly one of these is active, keyed by family
  std::optional<ComplexField> nls;
  std::optional<CHField> ch;
  std::optional<StateField> state;

  std::optional<MultiSymplecticSystem> system;          // generic models
  std::optional<NlsParams> nls_params;                  // nls
  std::optional<DampingCoefficient> gamma;              // ch
  std::optional<QuadraticInvariantAction> norm_action_;  // nls4 + expbox
};

inline DampingCoefficient ch_gamma_from_config(const RunConfig& cfg) {
  const auto it = cfg.functions.find("gamma_t");
  if (it != cfg.functions.end()) return it->second.to_coefficient();
  return DampingCoefficient::constant(cfg.scalar("gamma", 0.0));
}

inline MultiSymplecticSystem decay_system(const RunConfig& cfg) {
  MultiSymplecticSystem sys;
  sys.dim = 2;
  sys.K = MatrixXd::Zero(2, 2);
  sys.K(0, 1) = 1.0;
  sys.K(1, 0) = -1.0;
  sys.L = MatrixXd::Zero(2, 2);
  sys.S = [](const VectorXd&, double) { return 0.0; };
  sys.grad_S = [](const VectorXd&, double) { return VectorXd::Zero(2).eval(); };
  sys.hess_S = [](const VectorXd&, double) { return MatrixXd::Zero(2, 2).eval(); };
  sys.damping = DampingCoefficient::sinusoid(cfg.scalar("gamma", 0.1), cfg.scalar("c", 0.0),
                                             cfg.scalar("omega", 0.0));
  return sys;
}

inline ModelBundle make_bundle(const RunConfig& cfg) {
  ModelBundle bundle;
  const Grid1D grid = cfg.grid.to_grid();
  if (cfg.model == "ch") {
    bundle.gamma = ch_gamma_from_config(cfg);
    auto ic = ic_library(cfg.ic, grid);
    if (!std::holds_alternative<CHField>(ic)) {
      throw ConfigurationError("model 'ch' requires a Camassa-Holm initial profile");
    }
    bundle.ch = std::get<CHField>(std::move(ic));
    return bundle;
  }
  auto ic = ic_library(cfg.ic, grid);
  if (!std::holds_alternative<ComplexField>(ic)) {
    throw ConfigurationError("model '" + cfg.model + "' requires a complex initial profile");
  }
  ComplexField complex_ic = std::get<ComplexField>(std::move(ic));
  if (cfg.model == "nls") {
    NlsParams params;
    params.gamma = cfg.scalar("gamma", 0.0);
    params.c = cfg.scalar("c", 0.0);
    params.omega = cfg.scalar("omega", 0.0);
    bundle.nls_params = params;
    bundle.nls = std::move(complex_ic);
    return bundle;
  }
  if (cfg.model == "decay") {
    StateField z;
    z.grid = grid;
    z.t = complex_ic.t;
    z.values.resize(grid.n_nodes, 2);
    z.values.col(0) = complex_ic.p;
    z.values.col(1) = complex_ic.q;
    bundle.state = std::move(z);
    bundle.system = decay_system(cfg);
    return bundle;
  }
  // nls4 / nls4_conjugate
  const double gamma = cfg.scalar("gamma", 0.0);
  const double c = cfg.scalar("c", 0.0);
  const double omega = cfg.scalar("omega", 0.0);
  bundle.system = cfg.model == "nls4"
                      ? make_nls_system(NlsNonlinearity::cubic(), gamma, c, omega)
                      : make_nls_conjugate_system(NlsNonlinearity::cubic(), gamma, c, omega);
  bundle.state = lift_nls_state(complex_ic);
  if (cfg.model == "nls4" && cfg.scheme == SchemeKind::expbox) {
    bundle.norm_action_ = norm_action(*bundle.system);
  }
  return bundle;
}

inline MatrixXd bundle_columns(const RunConfig& cfg, const ModelBundle& b) {
  if (cfg.model == "nls") {
    MatrixXd m(b.nls->grid.n_nodes, 3);
    m.col(0) = b.nls->p;
    m.col(1) = b.nls->q;
    m.col(2) = (b.nls->p.array().square() + b.nls->q.array().square()).sqrt();
    return m;
  }
  if (cfg.model == "ch") return b.ch->u;
  return b.state->values;
}

inline double bundle_time(const RunConfig& cfg, const ModelBundle& b) {
  if (cfg.model == "nls") return b.nls->t;
  if (cfg.model == "ch") return b.ch->t;
  return b.state->t;
}

inline std::vector<std::string> diagnostics_columns(const RunConfig& cfg) {
  std::vector<std::string> active;
  if (cfg.model == "nls") {
    active = {"norm_law_residual_max", "norm_law_residual_global", "paper_norm_error"};
  } else if (cfg.model == "ch") {
    active = {"casimir_residual", "casimir_unweighted_drift", "energy_residual",
              "energy_residual_etheta"};
  } else if (cfg.model == "nls4" && cfg.scheme == SchemeKind::expbox) {
    active = {"quadratic_law_residual_max"};
  } else if (cfg.scheme == SchemeKind::expdg) {
    active = {"momentum_law_residual_max"};
  }
  active.push_back("newton_iterations");
  return active;
}

}  // namespace detail

/// Runs one configured experiment: steps to t_end, streams diagnostics and
/// snapshots, returns the maxima.  On a step failure the last good state is
/// persisted and the summary carries the error.
inline RunSummary run(const RunConfig& cfg) {
  validate(cfg);
  const auto t_start_wall = std::chrono::steady_clock::now();
  const std::filesystem::path out_dir(cfg.output.directory);
  ensure_directory(out_dir);

  detail::ModelBundle bundle = detail::make_bundle(cfg);
  const Grid1D grid = cfg.grid.to_grid();
  const NewtonConfig newton = cfg.newton.to_config();

  double t0 = 0.0;
  if (cfg.restart_from) {
    double t_loaded = 0.0;
    const MatrixXd values = detail::read_state(*cfg.restart_from, cfg.model, grid, t_loaded);
    if (cfg.model == "nls") {
      bundle.nls->p = values.col(0);
      bundle.nls->q = values.col(1);
      bundle.nls->t = t_loaded;
    } else if (cfg.model == "ch") {
      bundle.ch->u = values.col(0);
      bundle.ch->t = t_loaded;
    } else {
      bundle.state->values = values;
      bundle.state->t = t_loaded;
    }
    t0 = t_loaded;
  }

  const double span = cfg.t_end - t0;
  if (!(span > 0.0)) throw ConfigurationError("t_end does not exceed the starting time");
  const int n_steps = static_cast<int>(std::llround(span / cfg.dt));
  if (n_steps < 1 || std::abs(n_steps * cfg.dt - span) > 1e-9 * std::max(1.0, std::abs(span))) {
    throw ConfigurationError("t_end - t_start must be an integral number of steps");
  }

  RunSummary summary;
  summary.model = cfg.model;
  summary.scheme = to_string(cfg.scheme);

  const std::vector<std::string> diag_names = detail::diagnostics_columns(cfg);
  std::vector<std::string> header = {"t"};
  header.insert(header.end(), diag_names.begin(), diag_names.end());
  CsvWriter diag_csv(out_dir / "diagnostics.csv", header);

  detail::write_state(out_dir / detail::snapshot_name(0), cfg.model, grid,
                      detail::bundle_columns(cfg, bundle), t0);

  auto record = [&](int step, const DiagnosticRecord& rec) {
    for (const auto& [name, value] : rec.entries) {
      auto& slot = summary.max_residuals[name];
      slot = std::max(slot, std::abs(value));
    }
    if (step % cfg.output.diagnostics_stride == 0 || step == n_steps) {
      std::vector<double> row = {rec.t};
      for (const auto& name : diag_names) {
        const auto it = rec.entries.find(name);
        row.push_back(it == rec.entries.end() ? 0.0 : it->second);
      }
      diag_csv.write_row(row);
    }
  };

  int completed = 0;
  try {
    for (int step = 1; step <= n_steps; ++step) {
      const double t_prev = t0 + (step - 1) * cfg.dt;
      NewtonStats stats;
      DiagnosticRecord rec;
      rec.t = t_prev + cfg.dt;

      if (cfg.model == "nls") {
        ComplexField prev = *bundle.nls;
        prev.t = t_prev;
        const bool baseline = cfg.scheme == SchemeKind::mixed_euler;
        ComplexField next = baseline
                                ? step_nls_midpoint(prev, *bundle.nls_params, cfg.dt, newton, &stats)
                                : step_nls_embs(prev, *bundle.nls_params, cfg.dt, newton, &stats);
        const NormLawResult law =
            norm_law_residual(prev, next, bundle.nls_params->beta(), cfg.dt);
        rec.entries["norm_law_residual_max"] = law.max_node_residual;
        rec.entries["norm_law_residual_global"] = law.global_residual;
        rec.entries["paper_norm_error"] = law.paper_norm_error;
        bundle.nls = std::move(next);
      } else if (cfg.model == "ch") {
        CHField prev = *bundle.ch;
        prev.t = t_prev;
        const bool baseline = cfg.scheme == SchemeKind::midpoint_box;
        CHField next = baseline ? step_ch_preissmann(prev, *bundle.gamma, cfg.dt, newton, &stats)
                                : step_ch_expbox(prev, *bundle.gamma, cfg.dt, newton, &stats);
        const ChLawResult law = ch_casimir_and_energy(prev, next, *bundle.gamma, cfg.dt);
        rec.entries["casimir_residual"] = law.casimir_residual;
        rec.entries["casimir_unweighted_drift"] = law.unweighted_casimir_drift;
        rec.entries["energy_residual"] = law.energy_residual;
        rec.entries["energy_residual_etheta"] = law.energy_residual_etheta;
        bundle.ch = std::move(next);
      } else {
        StateField prev = *bundle.state;
        prev.t = t_prev;
        StateField next = step_scheme(*bundle.system, prev, cfg.dt, cfg.scheme, newton, &stats);
        if (bundle.norm_action_) {
          rec.entries["quadratic_law_residual_max"] =
              quadratic_law_residual(prev, next, *bundle.system, *bundle.norm_action_, cfg.dt);
        } else if (cfg.scheme == SchemeKind::expdg) {
          rec.entries["momentum_law_residual_max"] =
              momentum_law_residual(prev, next, *bundle.system, cfg.dt);
        }
        bundle.state = std::move(next);
      }

      rec.entries["newton_iterations"] = stats.iterations;
      summary.newton_total_iterations += stats.iterations;
      summary.newton_max_iterations = std::max(summary.newton_max_iterations, stats.iterations);
      record(step, rec);
      completed = step;
      if (step % cfg.output.snapshot_stride == 0 || step == n_steps) {
        detail::write_state(out_dir / detail::snapshot_name(step), cfg.model, grid,
                            detail::bundle_columns(cfg, bundle), t0 + step * cfg.dt);
      }
    }
  } catch (const NonConvergenceError& e) {
    summary.aborted = true;
    summary.error = e.what();
    diag_csv.comment(std::string("aborted ") + e.what());
  }

  detail::write_state(out_dir / "state_final.csv", cfg.model, grid,
                      detail::bundle_columns(cfg, bundle), t0 + completed * cfg.dt);

  summary.steps = completed;
  summary.t_final = t0 + completed * cfg.dt;
  summary.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start_wall).count();
  return summary;
}

struct ConvergenceRow {
  double dt = 0.0;
  double error = 0.0;
  double observed_order = std::numeric_limits<double>::quiet_NaN();
  bool exact = false;
};

namespace detail {

/// Steps a bundle in place without file output; returns the state as one
/// flat vector for norm comparisons.
inline VectorXd integrate_plain(const RunConfig& cfg, double dt, int n_steps) {
  ModelBundle bundle = make_bundle(cfg);
  const NewtonConfig newton = cfg.newton.to_config();
  for (int step = 0; step < n_steps; ++step) {
    const double t_prev = step * dt;
    if (cfg.model == "nls") {
      bundle.nls->t = t_prev;
      bundle.nls = cfg.scheme == SchemeKind::mixed_euler
                       ? step_nls_midpoint(*bundle.nls, *bundle.nls_params, dt, newton, nullptr)
                       : step_nls_embs(*bundle.nls, *bundle.nls_params, dt, newton, nullptr);
    } else if (cfg.model == "ch") {
      bundle.ch->t = t_prev;
      bundle.ch = cfg.scheme == SchemeKind::midpoint_box
                      ? step_ch_preissmann(*bundle.ch, *bundle.gamma, dt, newton, nullptr)
                      : step_ch_expbox(*bundle.ch, *bundle.gamma, dt, newton, nullptr);
    } else {
      bundle.state->t = t_prev;
      bundle.state = step_scheme(*bundle.system, *bundle.state, dt, cfg.scheme, newton, nullptr);
    }
  }
  RunConfig c = cfg;
  const MatrixXd cols = bundle_columns(c, bundle);
  VectorXd flat(cols.size());
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < cols.cols(); ++j) {
    flat.segment(k, cols.rows()) = cols.col(j);
    k += cols.rows();
  }
  return flat;
}

}  // namespace detail

/// Temporal self-convergence study: halves dt per level at fixed dx and
/// measures the discrete L2 distance to one further halving at t_end.
inline std::vector<ConvergenceRow> convergence_study(const RunConfig& cfg, int levels) {
  validate(cfg);
  if (levels < 3) throw ConfigurationError("convergence_study: levels must be >= 3");
  const int base_steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
  if (base_steps < 1 || std::abs(base_steps * cfg.dt - cfg.t_end) > 1e-9) {
    throw ConfigurationError("convergence_study: t_end must be an integral number of steps");
  }
  const double dx = cfg.grid.to_grid().dx();

  VectorXd reference;
  {
    const double dt_ref = cfg.dt / std::pow(2.0, levels);
    try {
      reference = detail::integrate_plain(cfg, dt_ref, base_steps << levels);
    } catch (const NonConvergenceError& e) {
      throw StudyError(std::string("reference level failed to converge: ") + e.what());
    }
  }

  std::vector<ConvergenceRow> rows;
  for (int level = 0; level < levels; ++level) {
    const double dt_l = cfg.dt / std::pow(2.0, level);
    VectorXd sol;
    try {
      sol = detail::integrate_plain(cfg, dt_l, base_steps << level);
    } catch (const NonConvergenceError& e) {
      throw StudyError("convergence level " + std::to_string(level) + " (dt = " +
                       format_double(dt_l) + ") failed: " + e.what());
    }
    ConvergenceRow row;
    row.dt = dt_l;
    row.error = std::sqrt((sol - reference).squaredNorm() * dx);
    row.exact = row.error < 1e-12 * (1.0 + std::sqrt(reference.squaredNorm() * dx));
    if (!rows.empty() && !row.exact && !rows.back().exact && rows.back().error > 0.0 &&
        row.error > 0.0) {
      row.observed_order = std::log2(rows.back().error / row.error);
    }
    rows.push_back(row);
  }
  return rows;
}

/// Writes figure-ready data per preset: a long-form surface CSV (x, t, value)
/// and the residual series (including both norm-error conventions).
inline void emit_figures_data(const std::vector<std::string>& names, const std::string& out_root,
                              std::optional<double> t_end_override = std::nullopt) {
  for (const auto& name : names) {
    RunConfig cfg = preset(name);
    if (t_end_override) cfg.t_end = *t_end_override;
    cfg.output.directory = out_root + "/" + name;
    const int n_steps = static_cast<int>(std::llround(cfg.t_end / cfg.dt));
    cfg.output.snapshot_stride = std::max(1, n_steps / 200);

    const RunSummary summary = run(cfg);
    if (summary.aborted) {
      throw StudyError("figures preset '" + name + "' aborted: " + summary.error);
    }

    const std::filesystem::path dir(cfg.output.directory);
    std::vector<std::filesystem::path> snaps;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      const std::string fname = entry.path().filename().string();
      if (fname.rfind("snapshot_", 0) == 0) snaps.push_back(entry.path());
    }
    std::sort(snaps.begin(), snaps.end());

    CsvWriter surface(dir / "surface.csv", {"x", "t", cfg.model == "ch" ? "u" : "abs_psi"});
    for (const auto& snap : snaps) {
      const CsvTable table = read_csv(snap);
      const double t = detail::comment_value(table, "t");
      const std::size_t value_col = table.header.size() - 1;  // abs_psi or u
      for (const auto& row : table.rows) {
        surface.write_row({row[0], t, row[value_col]});
      }
    }

    std::filesystem::copy_file(dir / "diagnostics.csv", dir / "residuals.csv",
                               std::filesystem::copy_options::overwrite_existing);
  }
}

}  // namespace expms
