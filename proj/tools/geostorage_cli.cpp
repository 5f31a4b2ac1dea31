// geostorage: simulate, analyze and inspect storage run files.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "geostorage/geostorage.hpp"

namespace gs = geostorage;
namespace gio = geostorage::io;

namespace {

int cmd_simulate(const std::string& path, const std::optional<std::string>& out_dir,
                 const std::optional<int>& stride, int dense_limit) {
  gio::RunDescription d = gio::parse_run(path);
  if (out_dir) d.output_dir = *out_dir;
  if (stride) {
    if (*stride < 0) throw gs::ConfigError("--snapshot-stride must be >= 0");
    d.snapshot_stride = *stride;
  }
  return gio::run(d, std::cout, {dense_limit});
}

int cmd_analyze(const std::string& path, int dense_limit) {
  const gio::RunDescription d = gio::parse_run(path);
  const gio::PreparedRun p = gio::prepare(d);
  for (const auto& w : p.step.warnings) std::cerr << "warning: " << w << "\n";
  gio::write_analysis(std::cout, p, d.theta, p.step.tau, dense_limit);
  for (gs::PumpRegime r : {gs::PumpRegime::On, gs::PumpRegime::Off}) {
    const auto report = gs::analyze(p.config, p.grid, p.mats[r], d.theta, dense_limit);
    if (report.verdict == gs::StabilityVerdict::RefutedByEigenvalues) return gio::kExitStability;
  }
  return gio::kExitOk;
}

int cmd_threshold(const std::string& path, const std::optional<double>& theta_opt) {
  const gio::RunDescription d = gio::parse_run(path);
  const double theta = theta_opt.value_or(d.theta);
  if (!(theta >= 0.0 && theta <= 1.0)) throw gs::ConfigError("--theta must lie in [0, 1]");
  const gs::GridModel grid = gs::build_grid(d.storage);
  std::cout << "eta=" << gs::format_shortest(gs::stability_eta(d.storage, grid))
            << ", tau_max(theta=" << gs::format_shortest(theta)
            << ")=" << gs::format_shortest(gs::stability_threshold(d.storage, grid, theta)) << "\n";
  return gio::kExitOk;
}

int cmd_archetypes(const std::string& path) {
  const gio::RunDescription d = gio::parse_run(path);
  const gs::GridModel grid = gs::build_grid(d.storage);
  const gs::SystemMatrices mats = gs::assemble(d.storage, grid);
  int total = 0;
  int matched = 0;
  for (gs::PumpRegime r : {gs::PumpRegime::On, gs::PumpRegime::Off}) {
    std::cout << "[" << gs::to_string(r) << "]\n";
    std::cout << "archetype,rows,diagonal,expected_diagonal,radius,expected_radius,margin,"
                 "expected_margin,row_sum,expected_row_sum,max_rel_error,match\n";
    int regime_matched = 0;
    for (const auto& m : gs::compare_archetypes(d.storage, grid, mats[r].a, r)) {
      const auto f = [](double x) { return gs::format_shortest(x); };
      std::cout << static_cast<int>(m.archetype) << ',' << m.row_count << ',';
      if (m.row_count > 0) {
        std::cout << f(m.assembled.diagonal) << ',' << f(m.expected.diagonal) << ','
                  << f(m.assembled.radius) << ',' << f(m.expected.radius) << ','
                  << f(m.assembled.margin) << ',' << f(m.expected.margin) << ','
                  << f(m.assembled.row_sum) << ',' << f(m.expected.row_sum) << ','
                  << f(m.worst_relative_error) << ',' << gs::format_bool(m.match) << "\n";
      } else {
        std::cout << "-," << f(m.expected.diagonal) << ",-," << f(m.expected.radius) << ",-,"
                  << f(m.expected.margin) << ",-," << f(m.expected.row_sum) << ",-,absent\n";
      }
      regime_matched += m.match ? 1 : 0;
    }
    std::cout << "matches=" << regime_matched << "/" << gs::kArchetypeCount << "\n";
    total += gs::kArchetypeCount;
    matched += regime_matched;
  }
  std::cout << "total_matches=" << matched << "/" << total << "\n";
  return gio::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temperature simulation and stability analysis for geothermal storages"};
  app.require_subcommand(1);

  std::string run_file;
  std::optional<std::string> out_dir;
  std::optional<int> stride;
  std::optional<double> theta;
  int dense_limit = gs::kDefaultDenseLimit;

  auto* simulate = app.add_subcommand("simulate", "Run the time stepping and write CSV output");
  simulate->add_option("run-file", run_file, "Run description")->required();
  simulate->add_option("--output-dir", out_dir,
                       std::string("Output directory (default: [output].directory, $") +
                           gio::kOutputDirVariable + ", geostorage_output)");
  simulate->add_option("--snapshot-stride", stride, "Write every n-th step (0: first and last only)");
  simulate->add_option("--dense-eig-limit", dense_limit, "Largest n for the dense eigenvalue check")
      ->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "Assemble both regimes and print the stability report");
  analyze->add_option("run-file", run_file, "Run description")->required();
  analyze->add_option("--dense-eig-limit", dense_limit, "Largest n for the dense eigenvalue check")
      ->capture_default_str();

  auto* threshold = app.add_subcommand("threshold", "Print eta and the step-size threshold");
  threshold->add_option("run-file", run_file, "Run description")->required();
  threshold->add_option("--theta", theta, "Theta (default: [time].theta)");

  auto* archetypes = app.add_subcommand("archetypes", "Compare assembled rows with their closed forms");
  archetypes->add_option("run-file", run_file, "Run description")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return gio::kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(run_file, out_dir, stride, dense_limit);
    if (*analyze) return cmd_analyze(run_file, dense_limit);
    if (*threshold) return cmd_threshold(run_file, theta);
    if (*archetypes) return cmd_archetypes(run_file);
  } catch (const gs::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return gio::kExitValidation;
  } catch (const gs::SimulationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return gio::kExitStability;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return gio::kExitValidation;
  }
  return gio::kExitUsage;
}
