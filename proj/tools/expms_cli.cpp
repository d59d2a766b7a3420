#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "expms/config.hpp"
#include "expms/runner.hpp"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitSolver = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw expms::ConfigurationError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void apply_overrides(expms::RunConfig& cfg, const std::optional<std::string>& out_dir,
                     const std::optional<double>& t_end) {
  if (out_dir) cfg.output.directory = *out_dir;
  if (t_end) cfg.t_end = *t_end;
}

void print_summary(const expms::RunSummary& summary, bool quiet) {
  if (quiet) return;
  std::cout << "model " << summary.model << ", scheme " << summary.scheme << ": " << summary.steps
            << " steps to t = " << expms::format_double(summary.t_final) << " in "
            << expms::format_double(summary.wall_seconds) << " s\n";
  std::cout << "newton iterations: total " << summary.newton_total_iterations << ", max/step "
            << summary.newton_max_iterations << "\n";
  for (const auto& [name, value] : summary.max_residuals) {
    if (name == "newton_iterations") continue;
    std::cout << "max " << name << " = " << expms::format_double(value) << "\n";
  }
  if (summary.aborted) std::cout << "run aborted: " << summary.error << "\n";
}

int run_and_report(expms::RunConfig cfg, bool quiet) {
  const expms::RunSummary summary = expms::run(cfg);
  print_summary(summary, quiet);
  if (summary.aborted) {
    std::cerr << "error: " << summary.error << "\n";
    return kExitSolver;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"structure-preserving exponential integrators for damped/driven PDEs"};
  app.require_subcommand(1);

  std::string config_path, preset_name;
  std::optional<std::string> out_dir;
  std::optional<double> t_end;
  bool quiet = false;
  bool dump_config = false;
  int levels = 3;
  std::vector<std::string> figure_names;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "output directory override");
    cmd->add_option("--t-end", t_end, "end time override");
    cmd->add_flag("--quiet", quiet, "suppress the summary");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "run an experiment from a config file");
  cmd_run->add_option("--config", config_path, "JSON run configuration")->required();
  add_common(cmd_run);

  CLI::App* cmd_preset = app.add_subcommand("preset", "run a named experiment preset");
  cmd_preset->add_option("name", preset_name, "preset name")->required();
  cmd_preset->add_flag("--dump-config", dump_config, "print the preset config as JSON and exit");
  add_common(cmd_preset);

  CLI::App* cmd_converge = app.add_subcommand("converge", "temporal self-convergence study");
  cmd_converge->add_option("--config", config_path, "JSON run configuration")->required();
  cmd_converge->add_option("--levels", levels, "number of dt levels (>= 3)");
  add_common(cmd_converge);

  CLI::App* cmd_figures = app.add_subcommand("figures", "emit figure data for presets");
  cmd_figures->add_option("names", figure_names, "preset names (default: all)");
  add_common(cmd_figures);

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      expms::RunConfig cfg = expms::parse_config(read_file(config_path));
      apply_overrides(cfg, out_dir, t_end);
      return run_and_report(std::move(cfg), quiet);
    }
    if (cmd_preset->parsed()) {
      expms::RunConfig cfg = expms::preset(preset_name);
      apply_overrides(cfg, out_dir, t_end);
      if (dump_config) {
        std::cout << expms::serialize_config(cfg) << "\n";
        return 0;
      }
      return run_and_report(std::move(cfg), quiet);
    }
    if (cmd_converge->parsed()) {
      expms::RunConfig cfg = expms::parse_config(read_file(config_path));
      apply_overrides(cfg, out_dir, t_end);
      const auto rows = expms::convergence_study(cfg, levels);
      expms::ensure_directory(cfg.output.directory);
      expms::CsvWriter csv(std::filesystem::path(cfg.output.directory) / "convergence.csv",
                           {"dt", "error", "observed_order", "exact"});
      if (!quiet) std::cout << "dt,error,observed_order,exact\n";
      for (const auto& row : rows) {
        csv.write_row({row.dt, row.error, row.observed_order, row.exact ? 1.0 : 0.0});
        if (!quiet) {
          std::cout << expms::format_double(row.dt) << "," << expms::format_double(row.error)
                    << "," << expms::format_double(row.observed_order) << ","
                    << (row.exact ? "exact" : "-") << "\n";
        }
      }
      return 0;
    }
    if (cmd_figures->parsed()) {
      const std::vector<std::string> names =
          figure_names.empty() ? expms::preset_names() : figure_names;
      expms::emit_figures_data(names, out_dir.value_or("figures"), t_end);
      return 0;
    }
  } catch (const expms::ConfigurationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const expms::NonConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const expms::LinearSolveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const expms::StudyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
