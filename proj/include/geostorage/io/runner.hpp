#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "geostorage/analysis.hpp"
#include "geostorage/assembly.hpp"
#include "geostorage/grid.hpp"
#include "geostorage/io/output.hpp"
#include "geostorage/io/run_file.hpp"
#include "geostorage/timestepping.hpp"

namespace geostorage::io {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitStability = 3;

inline constexpr const char* kOutputDirVariable = "GEOSTORAGE_OUTPUT_DIR";

struct TimeStepChoice {
  double tau{};
  bool automatic{};
  std::vector<std::string> warnings;
};

/// tau = auto picks safety * tau_max(theta). For theta = 1 there is no
/// threshold, so the explicit threshold tau_max(0) is used instead.
inline TimeStepChoice resolve_time_step(const RunDescription& d, const GridModel& grid) {
  TimeStepChoice c;
  if (d.tau) {
    c.tau = *d.tau;
    return c;
  }
  c.automatic = true;
  const double limit = stability_threshold(d.storage, grid, d.theta);
  if (std::isinf(limit)) {
    c.tau = d.safety * stability_threshold(d.storage, grid, 0.0);
    c.warnings.push_back("tau=auto with theta=1 has no stability threshold; using safety*tau_max(theta=0)=" +
                         format_shortest(c.tau) + ", set [time].tau to choose another step");
  } else {
    c.tau = d.safety * limit;
  }
  c.tau = std::min(c.tau, d.storage.horizon);
  return c;
}

inline PumpSchedule build_schedule(const RunDescription& d, double tau) {
  std::vector<ScheduleInterval> intervals;
  for (const auto& iv : d.schedule) {
    intervals.push_back({iv.start, iv.end, iv.regime, constant_inlet(iv.inlet)});
  }
  return PumpSchedule(std::move(intervals), d.storage.horizon, tau);
}

inline Vector initial_state(const RunDescription& d, const GridModel& grid) {
  if (const double* c = std::get_if<double>(&d.initial)) return Vector::Constant(grid.n(), *c);
  const FullField f = read_field_csv(std::filesystem::path(std::get<std::string>(d.initial)), grid.nx(),
                                     grid.ny(), grid.hx(), grid.hy());
  return restrict_to_unknowns(grid, f);
}

inline std::filesystem::path resolve_output_dir(const RunDescription& d) {
  if (!d.output_dir.empty()) return d.output_dir;
  if (const char* env = std::getenv(kOutputDirVariable); env && *env) return env;
  return "geostorage_output";
}

/// Everything up to, but not including, time stepping.
struct PreparedRun {
  StorageConfig config;
  GridModel grid;
  SystemMatrices mats;
  TimeStepChoice step;
};

inline PreparedRun prepare(const RunDescription& d) {
  GridModel grid = build_grid(d.storage);
  SystemMatrices mats = assemble(d.storage, grid);
  TimeStepChoice step = resolve_time_step(d, grid);
  return {d.storage, std::move(grid), std::move(mats), std::move(step)};
}

/// Stability report of both regimes and the theta/tau norm checks.
inline void write_analysis(std::ostream& os, const PreparedRun& p, double theta, double tau,
                           int dense_limit) {
  const double eta = stability_eta(p.config, p.grid);
  os << "[grid]\n"
     << "nx=" << p.grid.nx() << "\n"
     << "ny=" << p.grid.ny() << "\n"
     << "hx=" << format_shortest(p.grid.hx()) << "\n"
     << "hy=" << format_shortest(p.grid.hy()) << "\n"
     << "phx_count=" << p.grid.phx_count() << "\n"
     << "unknowns=" << p.grid.n() << "\n"
     << "eta=" << format_shortest(eta) << "\n\n";
  for (PumpRegime r : {PumpRegime::On, PumpRegime::Off}) {
    write_report(os, analyze(p.config, p.grid, p.mats[r], theta, dense_limit));
    os << "\n";
  }
  write_report(os, theta_norm_checks(p.config, p.grid, p.mats, theta, tau));
}

struct RunOptions {
  int dense_limit{kDefaultDenseLimit};
};

/// Runs a simulation and writes report.txt, norms.csv, summary.csv and
/// snapshots/step_NNNNNN.csv into the output directory. Returns kExitOk, or
/// kExitStability when the max-norm bound fails although tau lies in the
/// guaranteed region, or when the recursion aborts.
inline int run(const RunDescription& d, std::ostream& log, const RunOptions& opt = {}) {
  namespace fs = std::filesystem;
  const PreparedRun p = prepare(d);
  const Vector y0 = initial_state(d, p.grid);
  const ThetaStepper stepper(p.config, p.grid, p.mats, build_schedule(d, p.step.tau), d.theta);
  const MaterialDerived derived = derive_materials(p.config, p.grid);

  const fs::path dir = resolve_output_dir(d);
  const fs::path snap_dir = dir / "snapshots";
  fs::create_directories(snap_dir);
  for (const auto& entry : fs::directory_iterator(snap_dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("step_", 0) == 0 && entry.path().extension() == ".csv") fs::remove(entry.path());
  }

  std::vector<std::string> warnings = p.step.warnings;
  warnings.insert(warnings.end(), stepper.warnings().begin(), stepper.warnings().end());
  for (const auto& w : warnings) log << "warning: " << w << "\n";

  std::ofstream summary(dir / "summary.csv", std::ios::binary);
  summary << "step,t,regime,mean_temperature,energy\n";
  std::ofstream index(snap_dir / "index.csv", std::ios::binary);
  index << "step,t,regime,file\n";

  auto on_snapshot = [&](const Snapshot& s) {
    const FullField f = reconstruct_full_field(p.grid, derived, s.state, s.input, s.regime);
    char name[32];
    std::snprintf(name, sizeof name, "step_%06d.csv", s.step);
    write_field_csv(snap_dir / name, f, p.grid.hx(), p.grid.hy());
    const FieldAggregate a = aggregate(p.config, p.grid, f);
    summary << s.step << ',' << format_g17(s.time) << ',' << to_string(s.regime) << ','
            << format_g17(a.mean_temperature) << ',' << format_g17(a.energy) << '\n';
    index << s.step << ',' << format_g17(s.time) << ',' << to_string(s.regime) << ',' << name << '\n';
  };

  Trajectory tr;
  std::string abort_message;
  try {
    tr = simulate(stepper, y0, {d.snapshot_stride, false}, on_snapshot);
  } catch (const SimulationError& e) {
    abort_message = e.what();
  }

  {
    std::ofstream norms(dir / "norms.csv", std::ios::binary);
    norms << "step,t,max_norm,regime\n";
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      norms << k << ',' << format_g17(tr.times[k]) << ',' << format_g17(tr.max_norms[k]) << ','
            << to_string(tr.regimes[k]) << '\n';
    }
  }

  std::ofstream report(dir / "report.txt", std::ios::binary);
  write_analysis(report, p, d.theta, stepper.tau(), opt.dense_limit);
  report << "\n[run]\n"
         << "theta=" << format_shortest(d.theta) << "\n"
         << "tau_mode=" << (p.step.automatic ? "auto" : "fixed") << "\n"
         << "tau_requested=" << format_shortest(p.step.tau) << "\n"
         << "tau=" << format_shortest(stepper.tau()) << "\n"
         << "steps=" << stepper.steps() << "\n"
         << "tau_max=" << format_shortest(stepper.tau_max()) << "\n"
         << "guaranteed=" << format_bool(stepper.guaranteed()) << "\n"
         << "input_bound_constant=" << format_shortest(stepper.input_bound_constant()) << "\n"
         << "snapshot_stride=" << d.snapshot_stride << "\n";
  for (const auto& w : warnings) report << "warning=" << w << "\n";
  if (!tr.max_norms.empty()) {
    report << "initial_max_norm=" << format_shortest(tr.max_norms.front()) << "\n"
           << "final_max_norm=" << format_shortest(tr.max_norms.back()) << "\n"
           << "final_norm_bound=" << format_shortest(tr.norm_bounds.back()) << "\n";
  }
  report << "bound_violations=" << tr.bound_violations.size() << "\n";
  if (!tr.bound_violations.empty()) report << "bound_violation_steps=" << join_indices(tr.bound_violations) << "\n";

  int status = kExitOk;
  if (!abort_message.empty()) {
    report << "status=aborted\n" << "abort=" << abort_message << "\n";
    log << "error: simulation aborted: " << abort_message << "\n";
    status = kExitStability;
  } else if (!tr.bound_violations.empty() && tr.guaranteed) {
    report << "status=bound_violated\n";
    log << "error: max-norm bound violated at step " << tr.bound_violations.front()
        << " although tau lies in the guaranteed region\n";
    status = kExitStability;
  } else {
    report << "status=ok\n";
  }
  log << "simulated " << stepper.steps() << " steps of tau=" << format_shortest(stepper.tau())
      << " (theta=" << format_shortest(d.theta) << "), output in " << dir.string() << "\n";
  return status;
}

}  // namespace geostorage::io
