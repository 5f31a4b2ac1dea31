// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance          run all criteria
//   acceptance 3 5      run the listed criteria
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

#include "support.hpp"

using namespace geostorage;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass{true};
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (!pass) detail << "; ";
      else detail.str("");
      pass = false;
      detail << what;
    }
  }
};

struct Case {
  StorageConfig config;
  GridModel grid;
  SystemMatrices mats;
};

Case make(StorageConfig c) {
  GridModel g = build_grid(c);
  SystemMatrices m = assemble(c, g);
  return {std::move(c), std::move(g), std::move(m)};
}

std::string fmt(double x) { return format_shortest(x); }

double round_off(double scale) { return unit_slack(scale); }

// 1. Spectrum of A in the open left half plane on randomized configurations.
void criterion_1(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937 rng(20240601);
  int checked = 0;
  int failed = 0;
  for (int rep = 0; rep < 2; ++rep) {
    for (int phx : {1, 2}) {
      for (double lambda : {0.0, 10.0}) {
        const Case s = make(random_config(rng, 20, 20, phx, lambda));
        if (s.grid.n() > 1500) throw std::logic_error("config too large");
        for (PumpRegime r : {PumpRegime::On, PumpRegime::Off}) {
          const double norm = max_norm(s.mats[r].a);
          const double max_re = eigen_oracle(s.mats[r].a).max_real;
          ++checked;
          if (!(max_re < -1e-12 * norm)) {
            ++failed;
            o.require(false, "n_P=" + std::to_string(phx) + " lambda_G=" + fmt(lambda) + " " +
                                 std::string(to_string(r)) + ": max Re=" + fmt(max_re) +
                                 " not < " + fmt(-1e-12 * norm));
          }
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(secs < 30.0, "runtime " + fmt(secs) + " s");
  if (o.pass) o.detail << checked << " matrices, max Re < -1e-12 ||A||, " << fmt(std::round(secs * 100) / 100) << " s";
  else o.detail << " (" << failed << " of " << checked << " matrices)";
}

// 2. Every assembled row equals its closed form.
void criterion_2(Outcome& o) {
  const Case s = make(golden_config());
  int matched = 0;
  double worst = 0.0;
  for (PumpRegime r : {PumpRegime::On, PumpRegime::Off}) {
    for (const auto& m : compare_archetypes(s.config, s.grid, s.mats[r].a, r, 1e-12)) {
      worst = std::max(worst, m.worst_relative_error);
      if (m.match) ++matched;
      else o.require(false, std::string(to_string(r)) + " archetype " + std::to_string(static_cast<int>(m.archetype)) +
                                " rows=" + std::to_string(m.row_count) + " err=" + fmt(m.worst_relative_error));
    }
  }
  if (o.pass) o.detail << matched << "/28 archetype rows (both regimes), worst relative error " << fmt(worst);
}

// 3. ||A||_inf equals 4 max(a)(1/h_x^2 + 1/h_y^2) + 2 v_0/h_x when an interior row exists.
void criterion_3(Outcome& o) {
  std::mt19937 rng(7);
  std::vector<std::pair<std::string, StorageConfig>> configs = {{"golden", golden_config()}};
  StorageConfig fast_fluid = golden_config();
  fast_fluid.fluid = {1000.0, 6.0, 1000.0};  // a_F > a_M
  configs.emplace_back("a_F>a_M", fast_fluid);
  configs.emplace_back("random", random_config(rng, 20, 20, 2, 10.0));
  int attained = 0;
  int cases = 0;
  for (const auto& [name, c] : configs) {
    const Case s = make(c);
    for (PumpRegime r : {PumpRegime::On, PumpRegime::Off}) {
      bool interior = false;
      for (const auto& row : row_diagnostics(s.mats[r].a, s.grid)) {
        if (row.archetype == Archetype::MediumInterior || row.archetype == Archetype::FluidInterior) {
          interior = true;
        }
      }
      if (!interior) continue;
      ++cases;
      const double norm = max_norm(s.mats[r].a);
      const double bound = system_norm_bound(s.config, s.grid, r);
      const double s67 = std::max(closed_form_row(s.config, s.grid, r, Archetype::MediumInterior).row_sum,
                                  closed_form_row(s.config, s.grid, r, Archetype::FluidInterior).row_sum);
      // ||A|| <= max(S_6, S_7) <= bound must hold in any case.
      o.require(norm <= bound * (1.0 + 1e-12), name + " " + std::string(to_string(r)) + ": ||A||=" + fmt(norm) +
                                                   " above bound " + fmt(bound));
      o.require(norm <= s67 * (1.0 + 1e-12), name + " " + std::string(to_string(r)) +
                                                 ": ||A|| above max(S_6, S_7)");
      if (std::abs(norm - bound) <= 1e-12 * bound) {
        ++attained;
      } else {
        o.require(false, name + " " + std::string(to_string(r)) + ": ||A||=" + fmt(norm) + " != bound " +
                             fmt(bound) + " (rel gap " + fmt((bound - norm) / bound) + ")");
      }
    }
  }
  if (o.pass) o.detail << attained << "/" << cases << " regime matrices attain the bound";
  else o.detail << " [" << attained << "/" << cases << " attain it; ||A|| <= bound holds in all]";
}

// 4. Norm bounds on G, G^-1 and H.
void criterion_4(Outcome& o) {
  std::mt19937 rng(11);
  std::vector<StorageConfig> configs = {golden_config(), random_config(rng, 12, 16, 2, 10.0)};
  int checks = 0;
  for (const StorageConfig& c : configs) {
    const Case s = make(c);
    if (s.grid.n() > 300) throw std::logic_error("config too large");
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(s.grid.n(), s.grid.n());
    for (double theta : {0.0, 0.5}) {
      const double tmax = stability_threshold(s.config, s.grid, theta);
      for (double factor : {0.5, 1.0}) {
        const double tau = factor * tmax;
        for (PumpRegime r : {PumpRegime::On, PumpRegime::Off}) {
          const std::string tag = "theta=" + fmt(theta) + " tau=" + fmt(factor) + "*tau_max " + std::string(to_string(r));
          const Eigen::MatrixXd a(s.mats[r].a);
          const Eigen::MatrixXd g = id - tau * theta * a;
          const double jg = (2.0 * g.diagonal().cwiseAbs() - g.cwiseAbs().rowwise().sum()).minCoeff();
          const double slack = round_off(tau * inf_norm(a));
          o.require(jg >= 1.0 - slack, tag + ": min J(G)=" + fmt(jg));
          const double ginv = inf_norm(Eigen::MatrixXd(g.inverse()));
          o.require(ginv <= 1.0 + slack, tag + ": ||G^-1||=" + fmt(ginv));
          const Eigen::MatrixXd h = id + tau * (1.0 - theta) * a;
          const double limit = 2.0 / ((1.0 - theta) * inf_norm(a));
          o.require(tau <= limit, tag + ": tau above 2/((1-theta)||A||)");
          o.require(inf_norm(h) <= 1.0 + slack, tag + ": ||H||=" + fmt(inf_norm(h)));
          const double hl = inf_norm(Eigen::MatrixXd(id + limit * (1.0 - theta) * a));
          o.require(hl <= 1.0 + round_off(2.0), tag + ": ||H|| at the limit " + fmt(hl));
          const double hb = inf_norm(Eigen::MatrixXd(id + 1.01 * limit * (1.0 - theta) * a));
          o.require(hb > 1.0, tag + ": ||H|| at 1.01*limit " + fmt(hb));
          checks += 6;
        }
      }
    }
    for (double tau : {1.0, 1e3}) {  // theta = 1 has no finite threshold: G only, H = I
      const double t = tau * stability_threshold(s.config, s.grid, 0.0);
      for (PumpRegime r : {PumpRegime::On, PumpRegime::Off}) {
        const Eigen::MatrixXd a(s.mats[r].a);
        const Eigen::MatrixXd g = id - t * a;
        const double jg = (2.0 * g.diagonal().cwiseAbs() - g.cwiseAbs().rowwise().sum()).minCoeff();
        const double slack = round_off(t * inf_norm(a));
        o.require(jg >= 1.0 - slack, "theta=1: min J(G)=" + fmt(jg));
        o.require(inf_norm(Eigen::MatrixXd(g.inverse())) <= 1.0 + slack, "theta=1: ||G^-1|| > 1");
        checks += 2;
      }
    }
  }
  if (o.pass) o.detail << checks << " norm checks (rounding allowance 64 eps (1 + tau ||A||))";
}

// 5. Max-norm stability inequality along 500-step runs.
void criterion_5(Outcome& o) {
  std::mt19937 rng(5);
  std::vector<StorageConfig> configs = {golden_config(), random_config(rng, 14, 18, 2, 10.0)};
  int runs = 0;
  for (StorageConfig c : configs) {
    for (double theta : {0.0, 0.5, 1.0}) {
      const GridModel g0 = build_grid(c);
      const double tau = theta < 1.0 ? 0.9 * stability_threshold(c, g0, theta)
                                     : 20.0 * stability_threshold(c, g0, 0.0);
      c.horizon = 500 * tau;
      c.ground.amplitude = 5.0;
      c.ground.period = c.horizon / 3.0;
      const Case s = make(c);
      const double T = c.horizon;
      PumpSchedule sched({{0, 0.3 * T, PumpRegime::On, [](double t) { return 40.0 + 5.0 * std::sin(t); }},
                          {0.3 * T, 0.6 * T, PumpRegime::Off, constant_inlet(0.0)},
                          {0.6 * T, T, PumpRegime::On, constant_inlet(55.0)}},
                         T, tau);
      const ThetaStepper st(s.config, s.grid, s.mats, sched, theta);
      if (st.steps() != 500 || !st.guaranteed()) throw std::logic_error("criterion 5 setup");
      const auto tr = simulate(st, Vector::LinSpaced(s.grid.n(), 5.0, 25.0), {0, false});
      ++runs;
      o.require(tr.bound_violations.empty(), "theta=" + fmt(theta) + ": bound violated at step " +
                                                 (tr.bound_violations.empty() ? "" : std::to_string(tr.bound_violations[0])));
    }
  }
  if (o.pass) o.detail << runs << " runs x 500 steps, ||Y^k|| <= ||Y^0|| + C_B T max||g^j|| at every step";
}

// 6. The ground temperature is a fixed point with the pump off.
void criterion_6(Outcome& o) {
  int runs = 0;
  double worst = 0.0;
  for (double lambda : {10.0, 0.0}) {
    StorageConfig c = golden_config();
    c.ground_transfer = lambda;
    c.ground.amplitude = 0.0;
    c.ground.mean = 12.5;
    const GridModel g0 = build_grid(c);
    const double t0 = stability_threshold(c, g0, 0.0);
    for (double theta : {0.0, 0.5, 1.0}) {
      for (double factor : {0.1, 1.0, 2.0, 10.0, 1e4}) {
        const double tau = factor * t0;
        c.horizon = 1000 * tau;
        const Case s = make(c);
        const ThetaStepper st(s.config, s.grid, s.mats,
                              PumpSchedule::constant(PumpRegime::Off, 0.0, c.horizon, tau), theta);
        const std::string tag = "lambda_G=" + fmt(lambda) + " theta=" + fmt(theta) + " tau=" + fmt(factor) + "*tau_max(0)";
        double dev = 0.0;
        try {
          Vector y = Vector::Constant(s.grid.n(), c.ground.mean);
          for (int k = 0; k < st.steps(); ++k) {
            y = st.step(y, k);
            dev = std::max(dev, (y.array() - c.ground.mean).abs().maxCoeff());
          }
        } catch (const SimulationError& e) {
          dev = std::numeric_limits<double>::infinity();
        }
        ++runs;
        worst = std::max(worst, std::isfinite(dev) ? dev : 0.0);
        o.require(dev <= 1e-9, tag + ": deviation " + fmt(dev));
      }
    }
  }
  if (o.pass) o.detail << runs << " runs x 1000 steps, max deviation " << fmt(worst);
}

// 7. Temporal convergence order against tau/64 references.
void criterion_7(Outcome& o) {
  StorageConfig c = golden_config();
  c.ground.amplitude = 0.0;
  const GridModel g0 = build_grid(c);
  const double t0 = stability_threshold(c, g0, 0.0);
  c.horizon = 40.0 * t0;
  const Case s = make(c);
  const double T = c.horizon;
  const double q0 = c.ground.mean;
  const InletProfile ramp = [T, q0](double t) {
    const double x = std::sin(0.5 * std::numbers::pi * t / T);
    return q0 + 30.0 * x * x;
  };
  auto final_state = [&](double theta, double tau) {
    PumpSchedule sched({{0, T, PumpRegime::On, ramp}}, T, tau);
    const ThetaStepper st(s.config, s.grid, s.mats, sched, theta);
    Vector y = Vector::Constant(s.grid.n(), q0);
    for (int k = 0; k < st.steps(); ++k) y = st.step(y, k);
    return y;
  };
  std::ostringstream summary;
  for (double theta : {0.0, 0.5, 1.0}) {
    const double coarse = T / 40.0;  // tau_max(0)
    double e[2];
    for (int level = 0; level < 2; ++level) {
      const double tau = coarse / (1 << level);
      e[level] = inf_norm(Vector(final_state(theta, tau) - final_state(theta, tau / 64.0)));
    }
    const double order = std::log2(e[0] / e[1]);
    const double need = theta == 0.5 ? 1.9 : 0.9;
    o.require(order >= need, "theta=" + fmt(theta) + ": order " + fmt(order) + " < " + fmt(need));
    summary << "theta=" << fmt(theta) << ": " << std::fixed << std::setprecision(3) << order << "  ";
    summary.unsetf(std::ios::fixed);
  }
  if (o.pass) o.detail << "measured orders " << summary.str();
}

// 8. Sparse pipeline versus a dense brute-force recursion.
void criterion_8(Outcome& o) {
  StorageConfig big = golden_config();
  big.nx = 10;
  big.ny = 20;
  big.length_x = 5.0;
  big.length_y = 5.0;
  big.phx = {{4, 5}, {11, 13}};
  double worst = 0.0;
  int runs = 0;
  for (StorageConfig c : {golden_config(), big}) {
    const GridModel g0 = build_grid(c);
    if (g0.n() > 200) throw std::logic_error("config too large");
    for (double theta : {0.0, 0.5, 1.0}) {
      const double tau = theta == 0.0 ? stability_threshold(c, g0, 0.0) : 2.0 * stability_threshold(c, g0, 0.0);
      c.horizon = 100 * tau;
      c.ground.period = c.horizon;
      const Case s = make(c);
      PumpSchedule sched({{0, 40 * tau, PumpRegime::On, [](double t) { return 40.0 + 1e-3 * t; }},
                          {40 * tau, c.horizon, PumpRegime::Off, constant_inlet(0.0)}},
                         c.horizon, tau);
      const ThetaStepper st(s.config, s.grid, s.mats, sched, theta);
      const Vector y0 = Vector::LinSpaced(s.grid.n(), 8.0, 14.0);
      const auto tr = simulate(st, y0, {1, true});
      const auto ref = dense_theta_run(dense_reference(s.config), st, y0);
      for (std::size_t k = 0; k < ref.size(); ++k) {
        worst = std::max(worst, inf_norm(Vector(tr.snapshots[k].state - ref[k])));
      }
      ++runs;
    }
  }
  o.require(worst <= 1e-9, "max ||delta|| = " + fmt(worst));
  if (o.pass) o.detail << runs << " runs x 100 steps with a switch, max ||delta||_inf = " << fmt(worst);
}

// 9. CLI exit codes and byte-stable output.
void criterion_9(Outcome& o) {
  const std::string cli = GEOSTORAGE_CLI;
  const fs::path runs = GEOSTORAGE_RUNS_DIR;
  const std::string golden = (runs / "golden.run").string();
  const fs::path dir = fresh_dir("acceptance_cli");
  auto sh = [&](const std::string& args) { return run_command("'" + cli + "' " + args + " 2>/dev/null"); };

  const auto th = sh("threshold '" + (runs / "unit.run").string() + "' --theta 0");
  o.require(th.status == 0 && th.output == "eta=5, tau_max(theta=0)=0.2\n", "threshold output '" + th.output + "'");

  const auto an1 = sh("analyze '" + golden + "'");
  const auto an2 = sh("analyze '" + golden + "'");
  o.require(an1.status == 0, "analyze exit " + std::to_string(an1.status));
  o.require(an1.output.find("weakly_dominant=true") != std::string::npos &&
                an1.output.find("strongly_connected=true") != std::string::npos,
            "analyze report lacks dominance/connectivity lines");
  o.require(an1.output == an2.output, "analyze output not byte-stable");

  const auto ar1 = sh("archetypes '" + golden + "'");
  const auto ar2 = sh("archetypes '" + golden + "'");
  o.require(ar1.status == 0, "archetypes exit " + std::to_string(ar1.status));
  const auto first = ar1.output.find("matches=14/14");
  o.require(first != std::string::npos && ar1.output.find("matches=14/14", first + 1) != std::string::npos,
            "archetypes did not report 14/14 for both regimes");
  o.require(ar1.output == ar2.output, "archetypes output not byte-stable");

  const auto s1 = sh("simulate '" + golden + "' --output-dir '" + (dir / "a").string() + "'");
  const auto s2 = sh("simulate '" + golden + "' --output-dir '" + (dir / "b").string() + "' --snapshot-stride 10");
  o.require(s1.status == 0 && s2.status == 0, "simulate exit " + std::to_string(s1.status) + "/" + std::to_string(s2.status));
  int files = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const fs::path rel = fs::relative(e.path(), dir / "a");
    o.require(read_file(e.path()) == read_file(dir / "b" / rel), "simulate output differs: " + rel.string());
  }
  o.require(files >= 10, "simulate wrote only " + std::to_string(files) + " files");

  o.require(sh("").status == 2, "missing subcommand should exit 2");
  o.require(sh("threshold '" + golden + "' --theta").status == 2, "missing option value should exit 2");
  o.require(sh("frobnicate").status == 2, "unknown subcommand should exit 2");

  std::string text = read_file(runs / "golden.run");
  const fs::path bad = dir / "bad.run";
  std::ofstream(bad) << text.replace(text.find("lambda_G = 10"), 13, "lambda_G = -1");
  o.require(sh("analyze '" + bad.string() + "'").status == 1, "invalid run file should exit 1");
  o.require(sh("simulate '" + (dir / "missing.run").string() + "'").status == 1, "missing run file should exit 1");

  text = read_file(runs / "golden.run");
  text.replace(text.find("theta = 0.5"), 11, "theta = 0");
  text.replace(text.find("tau = 60"), 8, "tau = 3600");
  text.replace(text.find("horizon = 3600"), 14, "horizon = 1800000");
  text.replace(text.find("interval = 0, 1800, on, 40"), 26, "interval = 0, 900000, on, 40");
  text.replace(text.find("interval = 1800, 3600, off"), 26, "interval = 900000, 1800000, off");
  const fs::path wild = dir / "wild.run";
  std::ofstream(wild) << text;
  const auto blow = sh("simulate '" + wild.string() + "' --output-dir '" + (dir / "wild").string() + "'");
  o.require(blow.status == 3, "diverging explicit run should exit 3, got " + std::to_string(blow.status));
  if (o.pass) o.detail << "threshold/analyze/archetypes/simulate exit 0, byte-stable over " << files
                       << " output files, usage=2 validation=1 blow-up=3";
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {1, {"spectrum of A in the open left half plane", criterion_1}},
      {2, {"row archetypes match their closed forms", criterion_2}},
      {3, {"||A||_inf equals its bound when interior rows exist", criterion_3}},
      {4, {"G dominance, ||G^-1|| <= 1 and ||H|| <= 1 thresholds", criterion_4}},
      {5, {"trajectory max-norm bound", criterion_5}},
      {6, {"ground temperature is a fixed point", criterion_6}},
      {7, {"temporal order of the theta scheme", criterion_7}},
      {8, {"sparse pipeline equals dense recursion", criterion_8}},
      {9, {"CLI exit codes and byte-stable output", criterion_9}},
  };
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) selected.push_back(std::atoi(argv[k]));
  if (selected.empty())
    for (const auto& [id, _] : criteria) selected.push_back(id);

  bool all = true;
  for (int id : selected) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    Outcome o;
    try {
      it->second.second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    all &= o.pass;
    std::cout << "criterion " << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << it->second.first << "  ["
              << o.detail.str() << "]" << std::endl;
  }
  return all ? 0 : 1;
}
